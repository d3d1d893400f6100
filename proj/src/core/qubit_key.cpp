#include "qpdes/core/qubit_key.hpp"

#include <array>
#include <cstdio>

namespace qpdes {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string QubitKey::str() const {
  std::array<char, 37> buf{};
  std::snprintf(buf.data(), buf.size(), "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xFFFF),
                static_cast<unsigned>(hi & 0xFFFF), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return std::string(buf.data(), 36);
}

std::optional<QubitKey> QubitKey::parse(std::string_view text) {
  if (text.size() != 36) return std::nullopt;
  QubitKey key;
  int nibbles = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (text[i] != '-') return std::nullopt;
      continue;
    }
    const int v = hex_value(text[i]);
    if (v < 0) return std::nullopt;
    std::uint64_t& word = nibbles < 16 ? key.hi : key.lo;
    word = (word << 4) | static_cast<std::uint64_t>(v);
    ++nibbles;
  }
  return key;
}

QubitKey KeyFactory::next() {
  const std::uint64_t salt = splitmix(seed_) & 0xFFFFFFFULL;
  QubitKey key;
  // hi: entity(32) | salt(16) | version 8 (4) | salt(12)
  key.hi = (static_cast<std::uint64_t>(entity_) << 32) | ((salt >> 12) & 0xFFFF) << 16 | 0x8000ULL |
           (salt & 0xFFFULL);
  // lo: variant '10' | counter(62)
  key.lo = 0x8000000000000000ULL | (counter_ & 0x3FFFFFFFFFFFFFFFULL);
  ++counter_;
  return key;
}

}  // namespace qpdes

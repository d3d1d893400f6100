#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace qpdes {

/// 128-bit qubit identifier, printed in the canonical 8-4-4-4-12 UUID form.
/// Keys order by (hi, lo); the global QSM acquires locks in this order.
struct QubitKey {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend constexpr auto operator<=>(const QubitKey&, const QubitKey&) = default;

  std::string str() const;
  static std::optional<QubitKey> parse(std::string_view text);
};

/// Deterministic key minting for one entity. Keys embed the entity id and a
/// per-entity counter, so a key never repeats within a run and its value does
/// not depend on which worker hosts the entity. Version nibble 8 (custom
/// layout) and the RFC 4122 variant bits are set.
class KeyFactory {
 public:
  KeyFactory() = default;
  KeyFactory(std::uint64_t global_seed, std::uint32_t entity) : seed_(global_seed), entity_(entity) {}

  QubitKey next();
  std::uint64_t minted() const { return counter_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint32_t entity_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace qpdes

template <>
struct std::hash<qpdes::QubitKey> {
  std::size_t operator()(const qpdes::QubitKey& k) const noexcept {
    std::uint64_t x = k.hi ^ (k.lo * 0x9E3779B97F4A7C15ULL);
    x ^= x >> 31;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 29;
    return static_cast<std::size_t>(x);
  }
};

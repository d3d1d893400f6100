#include "qpdes/event/rng.hpp"

#include "qpdes/core/error.hpp"

namespace qpdes {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t global_seed, std::string_view entity_name) {
  return splitmix64(fnv1a64(entity_name) ^ splitmix64(global_seed));
}

RngStream& RngRegistry::add(const std::string& entity_name) {
  auto [it, inserted] = streams_.try_emplace(entity_name, derive_stream_seed(seed_, entity_name));
  return it->second;
}

bool RngRegistry::contains(std::string_view entity_name) const {
  return streams_.find(std::string(entity_name)) != streams_.end();
}

RngStream& RngRegistry::stream(std::string_view entity_name) {
  auto it = streams_.find(std::string(entity_name));
  if (it == streams_.end()) fail(ErrorCode::kUnknownEntity, std::string(entity_name));
  return it->second;
}

}  // namespace qpdes

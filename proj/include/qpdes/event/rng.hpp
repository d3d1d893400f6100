#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>

namespace qpdes {

/// One deterministic stream. Engine is std::mt19937_64 (bit-exact across
/// standard libraries); reals take the top 53 bits so draws lie in [0, 1).
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

/// Stream seed derivation: splitmix64(fnv1a64(entity_name) ^ splitmix64(global_seed)).
std::uint64_t derive_stream_seed(std::uint64_t global_seed, std::string_view entity_name);

/// Map from entity name to its own stream. Creating or drawing from one
/// entity's stream never touches another's.
class RngRegistry {
 public:
  explicit RngRegistry(std::uint64_t global_seed = 0) : seed_(global_seed) {}

  RngStream& add(const std::string& entity_name);
  bool contains(std::string_view entity_name) const;
  RngStream& stream(std::string_view entity_name);
  double next_random(std::string_view entity_name) { return stream(entity_name).next(); }

  std::uint64_t global_seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::unordered_map<std::string, RngStream> streams_;
};

}  // namespace qpdes

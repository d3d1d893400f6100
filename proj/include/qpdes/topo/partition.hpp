#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "qpdes/topo/network.hpp"

namespace qpdes::topo {

struct PartitionMap {
  std::size_t workers = 1;
  /// owner[router] = worker.
  std::vector<std::uint32_t> owner;

  std::vector<std::size_t> block_sizes() const;
  bool operator==(const PartitionMap&) const = default;
};

/// Contiguous blocks whose sizes differ by at most one.
PartitionMap partition_blocks(const NetworkSpec& spec, std::size_t workers);
/// Whole caves per worker, neighbouring caves together. IndivisiblePartition
/// unless the cave count is a multiple of `workers`.
PartitionMap partition_caveman(const NetworkSpec& spec, std::size_t workers);

enum class Energy { kP1, kP2, kP3 };
std::string_view to_string(Energy e);

/// P1: flows whose path crosses a worker boundary (counted once per flow).
/// P2: quantum links with endpoints on different workers.
/// P3: coefficient of variation (population std / mean) of per-worker memory loads.
double energy(const NetworkSpec& spec, const PartitionMap& pmap, Energy kind);
/// Population std / mean; 0 for an all-zero or empty list.
double coefficient_of_variation(const std::vector<double>& loads);
std::vector<double> worker_memory_loads(const NetworkSpec& spec, const PartitionMap& pmap);

struct AnnealConfig {
  std::size_t iterations = 10000;
  /// Unset: the initial energy, or 1 when that is zero.
  std::optional<double> initial_temperature;
  double cooling = 0.995;
  std::uint64_t seed = 0;
  Energy energy = Energy::kP2;
  /// Unset: partition_blocks.
  std::optional<PartitionMap> initial;
};

struct AnnealResult {
  PartitionMap best;
  double initial_energy = 0;
  double best_energy = 0;
  std::size_t accepted = 0;
};

/// Metropolis search over swaps of two routers on different workers; returns
/// the best state seen. Block sizes never change.
AnnealResult anneal_partition(const NetworkSpec& spec, std::size_t workers, const AnnealConfig& config);

}  // namespace qpdes::topo

#include "qpdes/topo/partition.hpp"

#include <cmath>

#include "qpdes/core/error.hpp"
#include "qpdes/event/rng.hpp"

namespace qpdes::topo {

std::vector<std::size_t> PartitionMap::block_sizes() const {
  std::vector<std::size_t> out(workers, 0);
  for (auto w : owner) ++out.at(w);
  return out;
}

PartitionMap partition_blocks(const NetworkSpec& spec, std::size_t workers) {
  if (workers == 0) fail(ErrorCode::kIndivisiblePartition, "need at least one worker");
  if (workers > spec.routers) fail(ErrorCode::kIndivisiblePartition, "more workers than routers");
  PartitionMap m{workers, std::vector<std::uint32_t>(spec.routers)};
  // Router r goes to floor(r * p / n): sizes differ by at most one.
  for (std::size_t r = 0; r < spec.routers; ++r) m.owner[r] = static_cast<std::uint32_t>(r * workers / spec.routers);
  return m;
}

PartitionMap partition_caveman(const NetworkSpec& spec, std::size_t workers) {
  if (spec.cave.size() != spec.routers) fail(ErrorCode::kIndivisiblePartition, "network has no cave structure");
  std::size_t caves = 0;
  for (auto c : spec.cave) caves = std::max<std::size_t>(caves, c + 1);
  if (workers == 0 || caves % workers != 0) {
    fail(ErrorCode::kIndivisiblePartition,
         std::to_string(caves) + " caves cannot be split evenly over " + std::to_string(workers) + " workers");
  }
  const std::size_t per = caves / workers;
  PartitionMap m{workers, std::vector<std::uint32_t>(spec.routers)};
  for (std::size_t r = 0; r < spec.routers; ++r) m.owner[r] = static_cast<std::uint32_t>(spec.cave[r] / per);
  return m;
}

std::string_view to_string(Energy e) {
  switch (e) {
    case Energy::kP1: return "P1";
    case Energy::kP2: return "P2";
    case Energy::kP3: return "P3";
  }
  return "?";
}

std::vector<double> worker_memory_loads(const NetworkSpec& spec, const PartitionMap& pmap) {
  const auto need = memory_demand(spec, spec.flows);
  std::vector<double> loads(pmap.workers, 0.0);
  for (std::size_t r = 0; r < spec.routers; ++r) loads[pmap.owner[r]] += static_cast<double>(need[r]);
  return loads;
}

double coefficient_of_variation(const std::vector<double>& loads) {
  if (loads.empty()) return 0.0;
  double mean = 0;
  for (double x : loads) mean += x;
  mean /= static_cast<double>(loads.size());
  if (mean == 0) return 0.0;
  double var = 0;
  for (double x : loads) var += (x - mean) * (x - mean);
  var /= static_cast<double>(loads.size());
  return std::sqrt(var) / mean;
}

double energy(const NetworkSpec& spec, const PartitionMap& pmap, Energy kind) {
  if (pmap.owner.size() != spec.routers) fail(ErrorCode::kValidationError, "partition does not cover every router");
  switch (kind) {
    case Energy::kP1: {
      double n = 0;
      for (const Flow& f : spec.flows) {
        for (std::size_t i = 1; i < f.path.size(); ++i) {
          if (pmap.owner[f.path[i]] != pmap.owner[f.path[0]]) {
            n += 1;
            break;
          }
        }
      }
      return n;
    }
    case Energy::kP2: {
      double n = 0;
      for (const Link& l : spec.links) n += pmap.owner[l.a] != pmap.owner[l.b] ? 1 : 0;
      return n;
    }
    case Energy::kP3: return coefficient_of_variation(worker_memory_loads(spec, pmap));
  }
  return 0;
}

AnnealResult anneal_partition(const NetworkSpec& spec, std::size_t workers, const AnnealConfig& config) {
  if (config.cooling <= 0 || config.cooling >= 1) fail(ErrorCode::kValidationError, "anneal.cooling must be in (0,1)");
  PartitionMap cur = config.initial ? *config.initial : partition_blocks(spec, workers);
  if (cur.workers != workers || cur.owner.size() != spec.routers) {
    fail(ErrorCode::kValidationError, "anneal.initial does not match the network");
  }
  double e = energy(spec, cur, config.energy);
  AnnealResult res{cur, e, e, 0};
  if (workers < 2) return res;

  RngStream rng(derive_stream_seed(config.seed, "anneal"));
  double temp = config.initial_temperature.value_or(e > 0 ? e : 1.0);
  for (std::size_t it = 0; it < config.iterations; ++it, temp *= config.cooling) {
    const auto a = static_cast<std::size_t>(rng.next_u64() % spec.routers);
    auto b = static_cast<std::size_t>(rng.next_u64() % spec.routers);
    while (cur.owner[b] == cur.owner[a]) b = static_cast<std::size_t>(rng.next_u64() % spec.routers);
    std::swap(cur.owner[a], cur.owner[b]);
    const double e2 = energy(spec, cur, config.energy);
    const double u = rng.next();
    if (e2 <= e || (temp > 0 && u < std::exp((e - e2) / temp))) {
      e = e2;
      ++res.accepted;
      if (e < res.best_energy) {
        res.best_energy = e;
        res.best = cur;
      }
    } else {
      std::swap(cur.owner[a], cur.owner[b]);
    }
  }
  return res;
}

}  // namespace qpdes::topo

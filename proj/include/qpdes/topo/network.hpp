#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qpdes::topo {

using RouterId = std::uint32_t;

/// A quantum link between two routers; the BSM node sits at the midpoint.
struct Link {
  RouterId a = 0;
  RouterId b = 0;
  double length_km = 1.0;

  bool operator==(const Link&) const = default;
};

struct Flow {
  RouterId src = 0;
  RouterId dst = 0;
  /// Shortest path, src first.
  std::vector<RouterId> path;

  std::size_t hops() const { return path.empty() ? 0 : path.size() - 1; }
  bool operator==(const Flow&) const = default;
};

/// Memories a flow occupies at endpoints and at intermediate routers.
inline constexpr std::size_t kEndpointMemories = 25;
inline constexpr std::size_t kIntermediateMemories = 50;

struct NetworkSpec {
  std::size_t routers = 0;
  std::vector<Link> links;
  std::vector<Flow> flows;
  /// Cave index per router for caveman graphs, empty otherwise.
  std::vector<std::uint32_t> cave;
  /// Memories per router; 0 sizes each router to its flow demand.
  std::size_t memories_per_router = 0;

  /// Adjacency lists sorted by neighbour id.
  std::vector<std::vector<RouterId>> adjacency() const;
  /// Index of the link joining a and b, if any.
  std::optional<std::size_t> link_between(RouterId a, RouterId b) const;
};

/// Path graph 0-1-...-(n-1). InvalidSize for n < 2.
NetworkSpec gen_linear(std::size_t n, double length_km = 1.0);
/// n_caves cliques of k routers; in each cave the edge (first, first+1) is
/// replaced by (first, last router of the previous cave), closing a cycle.
/// InvalidSize for n_caves < 2 or k < 2.
NetworkSpec gen_caveman(std::size_t n_caves, std::size_t k, double length_km = 10.0);
/// Seeded preferential attachment: each new router attaches to `m` distinct
/// existing routers picked with probability proportional to degree.
NetworkSpec gen_as_like(std::size_t n, std::uint64_t seed, std::size_t m = 2, double length_km = 10.0);

/// BFS hop counts from `src`; unreachable routers get SIZE_MAX.
std::vector<std::size_t> hop_distances(const NetworkSpec& spec, RouterId src);
/// Shortest path; ties break toward the smaller router id at each step.
std::vector<RouterId> shortest_path(const NetworkSpec& spec, RouterId src, RouterId dst);
bool connected(const NetworkSpec& spec);

/// One flow per router. Hop count h = ceil(Exp(1)) (at least 1); destination
/// uniform among routers at distance h, or at the nearest distance that exists.
std::vector<Flow> gen_flows(const NetworkSpec& spec, std::uint64_t seed);
/// Draws h = ceil(Exp(1)) from a uniform sample in [0, 1).
std::size_t hop_count_from_uniform(double u);
/// A single flow between the two ends of a linear network.
std::vector<Flow> end_to_end_flow(const NetworkSpec& spec);

/// Memories each router needs for the flows (25 per endpoint, 50 per transit).
std::vector<std::size_t> memory_demand(const NetworkSpec& spec, const std::vector<Flow>& flows);

}  // namespace qpdes::topo

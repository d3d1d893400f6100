#include "qpdes/topo/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "qpdes/core/error.hpp"
#include "qpdes/event/rng.hpp"

namespace qpdes::topo {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

// Unbiased enough for graph sizes here and identical on every platform,
// unlike std::uniform_int_distribution.
std::size_t pick(RngStream& rng, std::size_t n) { return static_cast<std::size_t>(rng.next_u64() % n); }

void add_link(NetworkSpec& s, RouterId a, RouterId b, double len) {
  if (a > b) std::swap(a, b);
  s.links.push_back(Link{a, b, len});
}

}  // namespace

std::vector<std::vector<RouterId>> NetworkSpec::adjacency() const {
  std::vector<std::vector<RouterId>> adj(routers);
  for (const Link& l : links) {
    adj[l.a].push_back(l.b);
    adj[l.b].push_back(l.a);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

std::optional<std::size_t> NetworkSpec::link_between(RouterId a, RouterId b) const {
  if (a > b) std::swap(a, b);
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].a == a && links[i].b == b) return i;
  }
  return std::nullopt;
}

NetworkSpec gen_linear(std::size_t n, double length_km) {
  if (n < 2) fail(ErrorCode::kInvalidSize, "linear network needs at least 2 routers");
  NetworkSpec s;
  s.routers = n;
  for (RouterId i = 0; i + 1 < n; ++i) add_link(s, i, i + 1, length_km);
  return s;
}

NetworkSpec gen_caveman(std::size_t n_caves, std::size_t k, double length_km) {
  if (n_caves < 2 || k < 2) fail(ErrorCode::kInvalidSize, "caveman graph needs at least 2 caves of 2 routers");
  const std::size_t n = n_caves * k;
  std::set<std::pair<RouterId, RouterId>> edges;
  for (std::size_t c = 0; c < n_caves; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) edges.emplace(c * k + i, c * k + j);
    }
  }
  for (std::size_t start = 0; start < n; start += k) {
    edges.erase({static_cast<RouterId>(start), static_cast<RouterId>(start + 1)});
    const auto prev = static_cast<RouterId>((start + n - 1) % n);
    edges.emplace(std::min<RouterId>(start, prev), std::max<RouterId>(start, prev));
  }
  NetworkSpec s;
  s.routers = n;
  for (const auto& [a, b] : edges) add_link(s, a, b, length_km);
  s.cave.resize(n);
  for (std::size_t r = 0; r < n; ++r) s.cave[r] = static_cast<std::uint32_t>(r / k);
  return s;
}

NetworkSpec gen_as_like(std::size_t n, std::uint64_t seed, std::size_t m, double length_km) {
  if (n < 2 || m < 1 || m >= n) fail(ErrorCode::kInvalidSize, "AS-like graph needs n >= 2 and 1 <= m < n");
  RngStream rng(derive_stream_seed(seed, "topology:as"));
  NetworkSpec s;
  s.routers = n;
  // Start from a clique on m + 1 routers; `ends` lists every edge endpoint, so
  // a uniform pick from it is degree-proportional.
  std::vector<RouterId> ends;
  for (RouterId i = 0; i <= m; ++i) {
    for (RouterId j = i + 1; j <= m; ++j) {
      add_link(s, i, j, length_km);
      ends.push_back(i);
      ends.push_back(j);
    }
  }
  for (auto v = static_cast<RouterId>(m + 1); v < n; ++v) {
    std::set<RouterId> targets;
    while (targets.size() < m) targets.insert(ends[pick(rng, ends.size())]);
    for (RouterId t : targets) {
      add_link(s, t, v, length_km);
      ends.push_back(t);
      ends.push_back(v);
    }
  }
  return s;
}

std::vector<std::size_t> hop_distances(const NetworkSpec& spec, RouterId src) {
  const auto adj = spec.adjacency();
  std::vector<std::size_t> d(spec.routers, kUnreached);
  std::deque<RouterId> q{src};
  d[src] = 0;
  while (!q.empty()) {
    const RouterId u = q.front();
    q.pop_front();
    for (RouterId v : adj[u]) {
      if (d[v] == kUnreached) {
        d[v] = d[u] + 1;
        q.push_back(v);
      }
    }
  }
  return d;
}

std::vector<RouterId> shortest_path(const NetworkSpec& spec, RouterId src, RouterId dst) {
  // Walk forward from src, always to the smallest neighbour one hop closer to dst.
  const auto to_dst = hop_distances(spec, dst);
  if (to_dst[src] == kUnreached) fail(ErrorCode::kValidationError, "no path between routers");
  const auto adj = spec.adjacency();
  std::vector<RouterId> path{src};
  RouterId u = src;
  while (u != dst) {
    for (RouterId v : adj[u]) {
      if (to_dst[v] + 1 == to_dst[u]) {
        u = v;
        break;
      }
    }
    path.push_back(u);
  }
  return path;
}

bool connected(const NetworkSpec& spec) {
  if (spec.routers == 0) return false;
  const auto d = hop_distances(spec, 0);
  return std::none_of(d.begin(), d.end(), [](std::size_t x) { return x == kUnreached; });
}

std::size_t hop_count_from_uniform(double u) {
  const double x = -std::log1p(-u);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(x)));
}

std::vector<Flow> gen_flows(const NetworkSpec& spec, std::uint64_t seed) {
  RngStream rng(derive_stream_seed(seed, "flows"));
  std::vector<Flow> flows;
  for (RouterId src = 0; src < spec.routers; ++src) {
    const std::size_t h = hop_count_from_uniform(rng.next());
    const auto d = hop_distances(spec, src);
    // Nearest existing distance to h; ties go to the shorter one.
    std::size_t best = kUnreached;
    for (std::size_t x : d) {
      if (x == 0 || x == kUnreached) continue;
      const auto gap = [h](std::size_t v) { return v > h ? v - h : h - v; };
      if (best == kUnreached || gap(x) < gap(best) || (gap(x) == gap(best) && x < best)) best = x;
    }
    if (best == kUnreached) fail(ErrorCode::kValidationError, "router has no reachable peer");
    std::vector<RouterId> candidates;
    for (RouterId r = 0; r < spec.routers; ++r) {
      if (d[r] == best) candidates.push_back(r);
    }
    const RouterId dst = candidates[pick(rng, candidates.size())];
    flows.push_back(Flow{src, dst, shortest_path(spec, src, dst)});
  }
  return flows;
}

std::vector<Flow> end_to_end_flow(const NetworkSpec& spec) {
  const auto last = static_cast<RouterId>(spec.routers - 1);
  return {Flow{0, last, shortest_path(spec, 0, last)}};
}

std::vector<std::size_t> memory_demand(const NetworkSpec& spec, const std::vector<Flow>& flows) {
  std::vector<std::size_t> need(spec.routers, 0);
  for (const Flow& f : flows) {
    for (std::size_t i = 0; i < f.path.size(); ++i) {
      const bool end = i == 0 || i + 1 == f.path.size();
      need[f.path[i]] += end ? kEndpointMemories : kIntermediateMemories;
    }
  }
  return need;
}

}  // namespace qpdes::topo

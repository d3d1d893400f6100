#include "qpdes/net/layout.hpp"

#include <algorithm>

#include "qpdes/core/error.hpp"

namespace qpdes::net {

namespace {

// Memory keys live in their own entity namespace so they never collide with
// photon keys minted by the router entity itself.
constexpr std::uint32_t kMemoryKeySpace = 0x80000000u;

}  // namespace

Layout::Layout(const topo::NetworkSpec& spec, const HardwareParams& hw, const LayoutOptions& opts)
    : spec_(spec), hw_(hw), memories_(spec.routers) {
  if (!topo::connected(spec_)) fail(ErrorCode::kValidationError, "network: quantum links do not connect all routers");
  for (const topo::Link& l : spec_.links) {
    if (!(l.length_km > 0)) fail(ErrorCode::kValidationError, "network.links: length must be positive");
    qc_delay_.push_back(hw_.qc_delay(l.length_km));
    survival_.push_back(hw_.survival(l.length_km));
  }

  std::vector<KeyFactory> keys;
  for (topo::RouterId r = 0; r < spec_.routers; ++r) keys.emplace_back(opts.seed, kMemoryKeySpace | r);

  for (std::size_t f = 0; f < spec_.flows.size(); ++f) {
    const topo::Flow& flow = spec_.flows[f];
    if (flow.path.size() < 2) fail(ErrorCode::kValidationError, "flow " + std::to_string(f) + " has no hop");
    flow_base_.push_back(slots_.size());
    chains_.push_back(topo::kEndpointMemories);
    positions_.emplace_back();
    for (std::size_t i = 0; i < flow.path.size(); ++i) positions_.back()[flow.path[i]] = i;
    for (std::size_t h = 0; h + 1 < flow.path.size(); ++h) {
      const auto link = spec_.link_between(flow.path[h], flow.path[h + 1]);
      if (!link) fail(ErrorCode::kValidationError, "flow " + std::to_string(f) + " uses a missing link");
      for (std::size_t c = 0; c < chains_.back(); ++c) {
        Slot s;
        s.flow = static_cast<std::uint32_t>(f);
        s.chain = static_cast<std::uint32_t>(c);
        s.hop = static_cast<std::uint32_t>(h);
        s.link = static_cast<std::uint32_t>(*link);
        s.bsm = bsm_entity(*link);
        const auto idx = static_cast<std::uint32_t>(slots_.size());
        for (int side = 0; side < 2; ++side) {
          const topo::RouterId r = flow.path[h + side];
          s.router[side] = r;
          s.memory[side] = static_cast<std::uint32_t>(memories_[r].size());
          memories_[r].push_back(MemoryInfo{keys[r].next(), idx, static_cast<Side>(side)});
        }
        slots_.push_back(s);
      }
    }
  }
  if (spec_.memories_per_router > 0) {
    for (topo::RouterId r = 0; r < spec_.routers; ++r) {
      if (memories_[r].size() > spec_.memories_per_router) {
        fail(ErrorCode::kValidationError, "network.memories_per_router: router " + std::to_string(r) + " needs " +
                                              std::to_string(memories_[r].size()) + " memories for its flows");
      }
    }
  }
  for (topo::RouterId r = 0; r < spec_.routers; ++r) {
    for (std::uint32_t m = 0; m < memories_[r].size(); ++m) key_index_.emplace(memories_[r][m].key, std::make_pair(r, m));
  }

  SimTime slowest = SimTime::zero();
  for (SimTime d : qc_delay_) slowest = std::max(slowest, d);
  const SimTime round_trip = slowest + hw_.resolution() + SimTime(1) + hw_.cc_delay();
  const SimTime step = SimTime::from_seconds(1.0 / hw_.memory_frequency_hz);
  if (step <= SimTime::zero()) fail(ErrorCode::kValidationError, "hardware.memory_frequency_hz: must be finite");
  period_ = SimTime(((round_trip.ticks() + step.ticks() - 1) / step.ticks()) * step.ticks());

  if (opts.stagger && !slots_.empty()) {
    // Interleave links: the q-th lane of every link before the (q+1)-th, so
    // lanes sharing a BSM are as far apart as possible.
    std::vector<std::size_t> rank(slots_.size());
    std::vector<std::size_t> seen(spec_.links.size(), 0);
    for (std::size_t i = 0; i < slots_.size(); ++i) rank[i] = seen[slots_[i].link]++;
    std::vector<std::size_t> order(slots_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(rank[a], slots_[a].link) < std::tie(rank[b], slots_[b].link);
    });
    const std::int64_t frame = std::max<std::int64_t>(1, hw_.tdm_frame().ticks());
    const auto k = static_cast<std::int64_t>(slots_.size());
    for (std::size_t q = 0; q < order.size(); ++q) {
      const std::int64_t raw = static_cast<std::int64_t>(q) * period_.ticks() / k;
      slots_[order[q]].phase = SimTime(raw / frame * frame);
    }
  }
}

std::size_t Layout::position(std::size_t flow, topo::RouterId r) const {
  const auto it = positions_[flow].find(r);
  if (it == positions_[flow].end()) fail(ErrorCode::kPrecondition, "router not on flow path");
  return it->second;
}

std::vector<WorkerId> Layout::owners(const topo::PartitionMap& pmap) const {
  if (pmap.owner.size() != spec_.routers) fail(ErrorCode::kValidationError, "partition does not cover every router");
  std::vector<WorkerId> out(entities());
  for (topo::RouterId r = 0; r < spec_.routers; ++r) out[r] = pmap.owner[r];
  for (std::size_t i = 0; i < spec_.links.size(); ++i) {
    out[bsm_entity(i)] = pmap.owner[std::max(spec_.links[i].a, spec_.links[i].b)];
  }
  return out;
}

std::vector<sync::LinkTiming> Layout::link_timings() const {
  std::vector<sync::LinkTiming> out;
  for (std::size_t i = 0; i < spec_.links.size(); ++i) {
    out.push_back(sync::LinkTiming{spec_.links[i].a, spec_.links[i].b, bsm_entity(i), qc_delay_[i], hw_.cc_delay()});
  }
  return out;
}

const MemoryInfo* Layout::find_memory(const QubitKey& k, topo::RouterId* router) const {
  const auto it = key_index_.find(k);
  if (it == key_index_.end()) return nullptr;
  if (router != nullptr) *router = it->second.first;
  return &memories_[it->second.first][it->second.second];
}

}  // namespace qpdes::net

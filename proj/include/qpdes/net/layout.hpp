#pragma once

#include <unordered_map>
#include <vector>

#include "qpdes/core/qubit_key.hpp"
#include "qpdes/event/event.hpp"
#include "qpdes/net/params.hpp"
#include "qpdes/sync/lookahead.hpp"
#include "qpdes/topo/partition.hpp"

namespace qpdes::net {

enum class Side : std::uint8_t { kLeft = 0, kRight = 1 };

/// One generation lane: a memory at each end of one hop of one flow, used by
/// one chain. Both memories attempt on the same grid so photons meet.
struct Slot {
  std::uint32_t flow = 0;
  std::uint32_t chain = 0;
  std::uint32_t hop = 0;
  std::uint32_t link = 0;
  topo::RouterId router[2] = {0, 0};
  /// Memory index inside each router's memory list.
  std::uint32_t memory[2] = {0, 0};
  EntityId bsm = 0;
  /// First attempt; later attempts follow every `period`.
  SimTime phase;
};

struct MemoryInfo {
  QubitKey key;
  std::uint32_t slot = 0;
  Side side = Side::kLeft;
};

struct LayoutOptions {
  /// Spread first attempts over the period so photons of different lanes
  /// never share a detector window. Off: every lane starts at time 0.
  bool stagger = true;
  std::uint64_t seed = 0;
};

/// Static description of the simulated network shared by all workers.
///
/// Entities: routers are 0..R-1, the BSM node of link i is R+i. A BSM node
/// belongs to the worker of its higher-numbered router.
class Layout {
 public:
  Layout(const topo::NetworkSpec& spec, const HardwareParams& hw, const LayoutOptions& opts);

  const topo::NetworkSpec& spec() const { return spec_; }
  const HardwareParams& hw() const { return hw_; }
  std::size_t routers() const { return spec_.routers; }
  std::size_t entities() const { return spec_.routers + spec_.links.size(); }
  EntityId bsm_entity(std::size_t link) const { return static_cast<EntityId>(spec_.routers + link); }
  bool is_bsm(EntityId e) const { return e >= spec_.routers; }
  std::size_t link_of_bsm(EntityId e) const { return e - spec_.routers; }

  const std::vector<Slot>& slots() const { return slots_; }
  const std::vector<MemoryInfo>& memories(topo::RouterId r) const { return memories_[r]; }
  std::size_t chains(std::size_t flow) const { return chains_[flow]; }
  std::size_t slot_index(std::size_t flow, std::size_t hop, std::size_t chain) const {
    return flow_base_[flow] + hop * chains_[flow] + chain;
  }
  /// Position of router r on the flow's path.
  std::size_t position(std::size_t flow, topo::RouterId r) const;
  /// Attempt period: whole multiple of 1/f_m that covers a herald round trip.
  SimTime period() const { return period_; }
  SimTime qc_delay(std::size_t link) const { return qc_delay_[link]; }
  double survival(std::size_t link) const { return survival_[link]; }

  /// Owner of every entity under a router partition.
  std::vector<WorkerId> owners(const topo::PartitionMap& pmap) const;
  std::vector<sync::LinkTiming> link_timings() const;

  /// Memory key lookup for audits.
  const MemoryInfo* find_memory(const QubitKey& k, topo::RouterId* router = nullptr) const;

 private:
  topo::NetworkSpec spec_;
  HardwareParams hw_;
  std::vector<Slot> slots_;
  std::vector<std::vector<MemoryInfo>> memories_;
  std::vector<std::size_t> chains_;
  std::vector<std::size_t> flow_base_;
  std::vector<std::unordered_map<topo::RouterId, std::size_t>> positions_;
  std::vector<SimTime> qc_delay_;
  std::vector<double> survival_;
  std::unordered_map<QubitKey, std::pair<topo::RouterId, std::uint32_t>> key_index_;
  SimTime period_;
};

}  // namespace qpdes::net

#pragma once

#include <array>
#include <memory>
#include <unordered_map>
#include <vector>

#include "qpdes/event/rng.hpp"
#include "qpdes/net/layout.hpp"
#include "qpdes/sync/engine.hpp"

namespace qpdes::net {

enum class MemoryStatus : std::uint8_t { kRaw, kEmitting, kEntangled };

struct ModelOptions {
  std::uint64_t seed = 0;
  bool purification = false;
  /// Fetch and check every delivered pair against |Phi+>. Adds server traffic.
  bool verify_pairs = false;
  /// No attempt is scheduled at or after this time.
  SimTime end_time = SimTime::infinity();
};

struct FlowMetrics {
  std::uint64_t delivered = 0;
  double fidelity_sum = 0;
  /// Time the source learned of its first delivery.
  SimTime first_delivery = SimTime::infinity();

  bool operator==(const FlowMetrics&) const = default;
};

struct NetMetrics {
  std::uint64_t attempts = 0;
  std::uint64_t emissions = 0;
  std::uint64_t photons_lost = 0;
  std::uint64_t detections = 0;
  std::uint64_t heralds = 0;
  std::uint64_t generation_failures = 0;
  std::uint64_t swaps = 0;
  std::uint64_t swap_failures = 0;
  std::uint64_t expirations = 0;
  std::uint64_t purify_kept = 0;
  std::uint64_t purify_discarded = 0;
  std::uint64_t verified = 0;
  std::uint64_t verify_failures = 0;
  std::vector<FlowMetrics> flows;

  void merge(const NetMetrics& o);
  std::uint64_t delivered() const;
  bool operator==(const NetMetrics&) const = default;
};

struct MemoryState {
  MemoryStatus status = MemoryStatus::kRaw;
  std::uint64_t epoch = 0;
  double fidelity = 0;
  /// Usable by swapping or delivery (after purification when enabled).
  bool ready = false;
  /// Left memory whose pair now reaches the flow source.
  bool linked = false;
  /// Epoch of the flow source memory this pair descends from.
  std::int64_t origin_epoch = -1;
  /// Epoch of the memory at the other end of the link when heralded.
  std::int64_t peer_epoch = -1;
  /// Kept half of a purification round awaiting the far side's outcome.
  bool purifying = false;
};

/// Per-worker protocol model: generation, swapping, purification and
/// delivery for the routers and BSM nodes this worker owns.
class QuantumNetwork final : public sync::Model {
 public:
  QuantumNetwork(std::shared_ptr<const Layout> layout, ModelOptions opts);

  void start(sync::Context& ctx) override;
  void handle(const Event& e, sync::Context& ctx) override;

  const NetMetrics& metrics() const { return metrics_; }
  const Layout& layout() const { return *layout_; }
  const MemoryState& memory(topo::RouterId r, std::size_t m) const { return mem_[r][m]; }

 private:
  struct Arrival {
    bool present[2] = {false, false};
    bool detected[2] = {false, false};
    SimTime at[2];
    QubitKey key[2];
    std::int64_t epoch[2] = {-1, -1};
  };

  MemoryState& mem(topo::RouterId r, std::uint32_t m) { return mem_[r][m]; }
  RngStream& rng(EntityId e);
  KeyFactory& photons(topo::RouterId r);

  void on_tick(const Event& e, sync::Context& ctx);
  void on_photon(const Event& e, sync::Context& ctx);
  void on_resolve(const Event& e, sync::Context& ctx);
  void on_herald(const Event& e, sync::Context& ctx);
  void on_fail(const Event& e, sync::Context& ctx);
  void on_swapinfo(const Event& e, sync::Context& ctx);
  void on_swapfail(const Event& e, sync::Context& ctx);
  void on_delivered(const Event& e, sync::Context& ctx);
  void on_purify(const Event& e, sync::Context& ctx);
  void on_purified(const Event& e, sync::Context& ctx);
  void on_expire(const Event& e, sync::Context& ctx);

  void make_ready(topo::RouterId r, std::size_t slot, sync::Context& ctx);
  void try_progress(topo::RouterId r, std::size_t flow, std::size_t chain, sync::Context& ctx);
  void swap(topo::RouterId r, std::size_t flow, std::size_t chain, std::size_t pos, sync::Context& ctx);
  void deliver(topo::RouterId r, std::size_t flow, std::size_t chain, sync::Context& ctx);
  void reset(topo::RouterId r, std::uint32_t m, sync::Context& ctx);
  void correct(topo::RouterId r, std::uint32_t m, int m0, int m1, sync::Context& ctx);
  void maybe_purify(topo::RouterId r, std::size_t slot, sync::Context& ctx);
  void send_router(topo::RouterId from, topo::RouterId to, SimTime at, const char* handler, Payload p,
                   sync::Context& ctx);

  std::shared_ptr<const Layout> layout_;
  ModelOptions opts_;
  SimTime cc_;
  std::vector<std::vector<MemoryState>> mem_;
  std::vector<std::unique_ptr<RngStream>> rng_;
  std::vector<std::unique_ptr<KeyFactory>> photon_keys_;
  std::vector<std::unordered_map<std::uint32_t, Arrival>> arrivals_;  // per link, by slot
  std::vector<std::array<std::int64_t, 2>> last_detection_;            // per link, ps
  NetMetrics metrics_;
};

}  // namespace qpdes::net

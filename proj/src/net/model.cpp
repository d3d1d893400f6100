#include "qpdes/net/model.hpp"

#include <cmath>
#include <limits>

#include "qpdes/core/error.hpp"
#include "qpdes/quantum/circuit.hpp"
#include "qpdes/quantum/ket.hpp"

namespace qpdes::net {

namespace {

using quantum::Amplitudes;
namespace circuits = quantum::circuits;

const Amplitudes& zero_state() {
  static const Amplitudes z{{1.0, 0.0}, {0.0, 0.0}};
  return z;
}

const Amplitudes& epr_state() {
  static const Amplitudes a{{quantum::kInvSqrt2, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {quantum::kInvSqrt2, 0.0}};
  return a;
}

int bit(const std::vector<int>& outcome, std::size_t i) { return outcome.at(i); }

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min() / 2;

}  // namespace

void NetMetrics::merge(const NetMetrics& o) {
  attempts += o.attempts;
  emissions += o.emissions;
  photons_lost += o.photons_lost;
  detections += o.detections;
  heralds += o.heralds;
  generation_failures += o.generation_failures;
  swaps += o.swaps;
  swap_failures += o.swap_failures;
  expirations += o.expirations;
  purify_kept += o.purify_kept;
  purify_discarded += o.purify_discarded;
  verified += o.verified;
  verify_failures += o.verify_failures;
  if (flows.size() < o.flows.size()) flows.resize(o.flows.size());
  for (std::size_t f = 0; f < o.flows.size(); ++f) {
    flows[f].delivered += o.flows[f].delivered;
    flows[f].fidelity_sum += o.flows[f].fidelity_sum;
    flows[f].first_delivery = std::min(flows[f].first_delivery, o.flows[f].first_delivery);
  }
}

std::uint64_t NetMetrics::delivered() const {
  std::uint64_t n = 0;
  for (const FlowMetrics& f : flows) n += f.delivered;
  return n;
}

QuantumNetwork::QuantumNetwork(std::shared_ptr<const Layout> layout, ModelOptions opts)
    : layout_(std::move(layout)), opts_(opts), cc_(layout_->hw().cc_delay()) {
  mem_.resize(layout_->routers());
  for (topo::RouterId r = 0; r < layout_->routers(); ++r) mem_[r].resize(layout_->memories(r).size());
  rng_.resize(layout_->entities());
  photon_keys_.resize(layout_->routers());
  arrivals_.resize(layout_->spec().links.size());
  last_detection_.assign(layout_->spec().links.size(), {kNever, kNever});
  metrics_.flows.resize(layout_->spec().flows.size());
}

RngStream& QuantumNetwork::rng(EntityId e) {
  auto& slot = rng_[e];
  if (!slot) {
    const std::string name = layout_->is_bsm(e) ? "bsm:" + std::to_string(layout_->link_of_bsm(e))
                                                 : "router:" + std::to_string(e);
    slot = std::make_unique<RngStream>(derive_stream_seed(opts_.seed, name));
  }
  return *slot;
}

KeyFactory& QuantumNetwork::photons(topo::RouterId r) {
  auto& f = photon_keys_[r];
  if (!f) f = std::make_unique<KeyFactory>(opts_.seed, r);
  return *f;
}

void QuantumNetwork::start(sync::Context& ctx) {
  const auto& slots = layout_->slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (int side = 0; side < 2; ++side) {
      const topo::RouterId r = slots[i].router[side];
      if (!ctx.is_local(r) || slots[i].phase >= opts_.end_time) continue;
      Payload p;
      p.set("slot", static_cast<std::int64_t>(i)).set("side", std::int64_t{side});
      ctx.schedule(r, r, slots[i].phase, "tick", std::move(p));
    }
  }
}

void QuantumNetwork::handle(const Event& e, sync::Context& ctx) {
  const std::string& h = e.handler;
  if (h == "tick") return on_tick(e, ctx);
  if (h == "photon") return on_photon(e, ctx);
  if (h == "resolve") return on_resolve(e, ctx);
  if (h == "herald") return on_herald(e, ctx);
  if (h == "fail") return on_fail(e, ctx);
  if (h == "swapinfo") return on_swapinfo(e, ctx);
  if (h == "swapfail") return on_swapfail(e, ctx);
  if (h == "delivered") return on_delivered(e, ctx);
  if (h == "purify") return on_purify(e, ctx);
  if (h == "purified") return on_purified(e, ctx);
  if (h == "expire") return on_expire(e, ctx);
  fail(ErrorCode::kPrecondition, "unknown handler " + h);
}

void QuantumNetwork::send_router(topo::RouterId from, topo::RouterId to, SimTime at, const char* handler, Payload p,
                                 sync::Context& ctx) {
  ctx.schedule(from, to, at, handler, std::move(p));
}

// Generation --------------------------------------------------------------

void QuantumNetwork::on_tick(const Event& e, sync::Context& ctx) {
  const auto si = static_cast<std::size_t>(e.payload.integer("slot"));
  const int side = static_cast<int>(e.payload.integer("side"));
  const Slot& s = layout_->slots()[si];
  const topo::RouterId r = e.target;
  const std::uint32_t mi = s.memory[side];
  MemoryState& m = mem(r, mi);
  const HardwareParams& hw = layout_->hw();

  // A herald or failure notice always lands before the next tick; silence
  // means both photons were lost.
  if (m.status == MemoryStatus::kEmitting) {
    m.status = MemoryStatus::kRaw;
    ++m.epoch;
  }
  if (m.status == MemoryStatus::kRaw) {
    ++metrics_.attempts;
    RngStream& g = rng(r);
    if (g.next() < hw.memory_efficiency) {
      ++metrics_.emissions;
      const QubitKey photon = photons(r).next();
      const QubitKey keys[2] = {layout_->memories(r)[mi].key, photon};
      ctx.qsm().set(std::span<const QubitKey>(keys, 2), epr_state());
      m.status = MemoryStatus::kEmitting;
      ++m.epoch;
      m.ready = m.linked = m.purifying = false;
      if (g.next() < layout_->survival(s.link)) {
        Payload p;
        p.set("slot", static_cast<std::int64_t>(si))
            .set("side", std::int64_t{side})
            .set("key", photon)
            .set("epoch", static_cast<std::int64_t>(m.epoch));
        const bool remote = !ctx.is_local(s.bsm);
        const qsm::Transfer t = ctx.qsm().transfer_out(photon, remote);
        if (remote) {
          p.set("_xfer", std::int64_t{1});
          if (t.value) p.set("_amps", *t.value);
        }
        ctx.schedule(r, s.bsm, ctx.now() + layout_->qc_delay(s.link), "photon", std::move(p));
      } else {
        ++metrics_.photons_lost;
        ctx.qsm().discard(photon);
      }
    }
  }
  const SimTime next = ctx.now() + layout_->period();
  if (next < opts_.end_time) {
    Payload p;
    p.set("slot", static_cast<std::int64_t>(si)).set("side", std::int64_t{side});
    ctx.schedule(r, r, next, "tick", std::move(p));
  }
}

void QuantumNetwork::on_photon(const Event& e, sync::Context& ctx) {
  const auto si = static_cast<std::uint32_t>(e.payload.integer("slot"));
  const int side = static_cast<int>(e.payload.integer("side"));
  const QubitKey key = e.payload.key("key");
  const Slot& s = layout_->slots()[si];
  const EntityId b = e.target;
  if (e.payload.has("_xfer")) {
    qsm::Transfer t{key, std::nullopt};
    if (e.payload.has("_amps")) t.value = e.payload.amplitudes("_amps");
    ctx.qsm().adopt(t);
  }
  const HardwareParams& hw = layout_->hw();
  bool detected = rng(b).next() < hw.detector_efficiency;
  auto& last = last_detection_[s.link][side];
  if (detected && last != kNever && ctx.now().ticks() - last < hw.dead_time().ticks()) detected = false;
  if (detected) {
    last = ctx.now().ticks();
    ++metrics_.detections;
  }

  auto [it, fresh] = arrivals_[s.link].try_emplace(si);
  Arrival& a = it->second;
  a.present[side] = true;
  a.detected[side] = detected;
  a.at[side] = ctx.now();
  a.key[side] = key;
  a.epoch[side] = e.payload.integer("epoch");
  if (fresh) {
    // Resolve just after the coincidence window closes.
    Payload p;
    p.set("slot", static_cast<std::int64_t>(si));
    ctx.schedule(b, b, ctx.now() + hw.resolution() + SimTime(1), "resolve", std::move(p));
  }
}

void QuantumNetwork::on_resolve(const Event& e, sync::Context& ctx) {
  const auto si = static_cast<std::uint32_t>(e.payload.integer("slot"));
  const Slot& s = layout_->slots()[si];
  const EntityId b = e.target;
  auto node = arrivals_[s.link].extract(si);
  if (node.empty()) return;
  const Arrival a = node.mapped();

  bool paired = a.present[0] && a.present[1] && a.detected[0] && a.detected[1];
  if (paired) {
    const SimTime gap = a.at[0] > a.at[1] ? a.at[0] - a.at[1] : a.at[1] - a.at[0];
    paired = gap <= layout_->hw().resolution();
  }
  RngStream& g = rng(b);
  if (paired && g.next() < layout_->hw().bsm_intrinsic_success) {
    const QubitKey keys[2] = {a.key[0], a.key[1]};
    const auto out = ctx.qsm().run(circuits::bell_measurement(), std::span<const QubitKey>(keys, 2), g.next());
    ctx.qsm().discard(a.key[0]);
    ctx.qsm().discard(a.key[1]);
    ++metrics_.heralds;
    for (int side = 0; side < 2; ++side) {
      Payload p;
      p.set("slot", static_cast<std::int64_t>(si))
          .set("side", std::int64_t{side})
          .set("m0", std::int64_t{bit(out, 0)})
          .set("m1", std::int64_t{bit(out, 1)})
          .set("epoch", a.epoch[side])
          .set("peer_epoch", a.epoch[1 - side]);
      ctx.schedule(b, s.router[side], ctx.now() + cc_, "herald", std::move(p));
    }
    return;
  }
  ++metrics_.generation_failures;
  for (int side = 0; side < 2; ++side) {
    if (a.present[side]) ctx.qsm().discard(a.key[side]);
  }
  for (int side = 0; side < 2; ++side) {
    Payload p;
    p.set("slot", static_cast<std::int64_t>(si))
        .set("side", std::int64_t{side})
        .set("epoch", a.present[side] ? a.epoch[side] : std::int64_t{-1});
    ctx.schedule(b, s.router[side], ctx.now() + cc_, "fail", std::move(p));
  }
}

void QuantumNetwork::on_fail(const Event& e, sync::Context&) {
  const auto si = static_cast<std::size_t>(e.payload.integer("slot"));
  const int side = static_cast<int>(e.payload.integer("side"));
  const std::int64_t epoch = e.payload.integer("epoch");
  MemoryState& m = mem(e.target, layout_->slots()[si].memory[side]);
  if (m.status != MemoryStatus::kEmitting) return;
  if (epoch >= 0 && static_cast<std::uint64_t>(epoch) != m.epoch) return;
  m.status = MemoryStatus::kRaw;
  ++m.epoch;
}

void QuantumNetwork::on_herald(const Event& e, sync::Context& ctx) {
  const auto si = static_cast<std::size_t>(e.payload.integer("slot"));
  const int side = static_cast<int>(e.payload.integer("side"));
  const Slot& s = layout_->slots()[si];
  const topo::RouterId r = e.target;
  const std::uint32_t mi = s.memory[side];
  MemoryState& m = mem(r, mi);
  if (m.status != MemoryStatus::kEmitting || static_cast<std::uint64_t>(e.payload.integer("epoch")) != m.epoch) return;
  m.status = MemoryStatus::kEntangled;
  m.fidelity = layout_->hw().raw_fidelity;
  m.peer_epoch = e.payload.integer("peer_epoch");
  m.origin_epoch = -1;
  // The right end turns the heralded Bell state into |Phi+>.
  if (side == static_cast<int>(Side::kRight)) {
    correct(r, mi, static_cast<int>(e.payload.integer("m0")), static_cast<int>(e.payload.integer("m1")), ctx);
  }
  const SimTime expiry = ctx.now() + layout_->hw().coherence();
  if (expiry < opts_.end_time) {
    Payload p;
    p.set("mem", std::int64_t{mi}).set("epoch", static_cast<std::int64_t>(m.epoch));
    ctx.schedule(r, r, expiry, "expire", std::move(p));
  }
  make_ready(r, si, ctx);
}

void QuantumNetwork::on_expire(const Event& e, sync::Context& ctx) {
  const auto mi = static_cast<std::uint32_t>(e.payload.integer("mem"));
  const MemoryState& m = mem(e.target, mi);
  if (m.status != MemoryStatus::kEntangled || static_cast<std::uint64_t>(e.payload.integer("epoch")) != m.epoch) return;
  ++metrics_.expirations;
  reset(e.target, mi, ctx);
}

void QuantumNetwork::correct(topo::RouterId r, std::uint32_t m, int m0, int m1, sync::Context& ctx) {
  if (m0 == 0 && m1 == 0) return;
  const QubitKey k = layout_->memories(r)[m].key;
  ctx.qsm().run(circuits::pauli_correction(m1, m0), std::span<const QubitKey>(&k, 1), std::nullopt);
}

void QuantumNetwork::reset(topo::RouterId r, std::uint32_t m, sync::Context& ctx) {
  ctx.qsm().set(layout_->memories(r)[m].key, zero_state());
  MemoryState& s = mem(r, m);
  s.status = MemoryStatus::kRaw;
  ++s.epoch;
  s.ready = s.linked = s.purifying = false;
  s.origin_epoch = s.peer_epoch = -1;
}

// Purification ------------------------------------------------------------

void QuantumNetwork::make_ready(topo::RouterId r, std::size_t si, sync::Context& ctx) {
  const Slot& s = layout_->slots()[si];
  if (!opts_.purification) {
    mem(r, s.memory[r == s.router[0] ? 0 : 1]).ready = true;
    try_progress(r, s.flow, s.chain, ctx);
    return;
  }
  if (r == s.router[0]) maybe_purify(r, si, ctx);
}

void QuantumNetwork::maybe_purify(topo::RouterId r, std::size_t si, sync::Context& ctx) {
  const Slot& s = layout_->slots()[si];
  const std::size_t partner = s.chain ^ 1u;
  if (partner >= layout_->chains(s.flow)) return;  // odd chain out never pairs
  const std::size_t kept_slot = layout_->slot_index(s.flow, s.hop, s.chain & ~1u);
  const std::size_t sacr_slot = layout_->slot_index(s.flow, s.hop, s.chain | 1u);
  const std::uint32_t km = layout_->slots()[kept_slot].memory[0];
  const std::uint32_t sm = layout_->slots()[sacr_slot].memory[0];
  MemoryState& kept = mem(r, km);
  MemoryState& sacr = mem(r, sm);
  // One round per pair: a ready pair has been purified already.
  if (kept.status != MemoryStatus::kEntangled || sacr.status != MemoryStatus::kEntangled || kept.purifying ||
      kept.ready) {
    return;
  }
  const QubitKey keys[2] = {layout_->memories(r)[km].key, layout_->memories(r)[sm].key};
  const auto out = ctx.qsm().run(circuits::purification_half(), std::span<const QubitKey>(keys, 2), rng(r).next());
  Payload p;
  p.set("slot", static_cast<std::int64_t>(kept_slot))
      .set("a", std::int64_t{bit(out, 0)})
      .set("kept", static_cast<std::int64_t>(kept.epoch))
      .set("sacr", static_cast<std::int64_t>(sacr.epoch));
  sacr.status = MemoryStatus::kRaw;
  ++sacr.epoch;
  sacr.ready = false;
  kept.purifying = true;
  send_router(r, s.router[1], ctx.now() + cc_, "purify", std::move(p), ctx);
}

void QuantumNetwork::on_purify(const Event& e, sync::Context& ctx) {
  const auto kept_slot = static_cast<std::size_t>(e.payload.integer("slot"));
  const Slot& ks = layout_->slots()[kept_slot];
  const Slot& ss = layout_->slots()[kept_slot + 1];
  const topo::RouterId r = e.target;
  MemoryState& kept = mem(r, ks.memory[1]);
  MemoryState& sacr = mem(r, ss.memory[1]);
  // Only the halves of the two pairs the near side measured take part.
  const bool kept_match = kept.status == MemoryStatus::kEntangled && kept.peer_epoch == e.payload.integer("kept");
  const bool sacr_match = sacr.status == MemoryStatus::kEntangled && sacr.peer_epoch == e.payload.integer("sacr");
  bool ok = false;
  if (kept_match && sacr_match) {
    const QubitKey keys[2] = {layout_->memories(r)[ks.memory[1]].key, layout_->memories(r)[ss.memory[1]].key};
    const auto out = ctx.qsm().run(circuits::purification_half(), std::span<const QubitKey>(keys, 2), rng(r).next());
    sacr.status = MemoryStatus::kRaw;
    ++sacr.epoch;
    sacr.ready = false;
    ok = bit(out, 0) == e.payload.integer("a");
  } else if (sacr_match) {
    // Its partner was measured on the near side; left alone it would hold the lane until expiry.
    reset(r, ss.memory[1], ctx);
  }
  double fid = 0;
  if (ok) {
    ++metrics_.purify_kept;
    kept.fidelity = fid = purified_fidelity(kept.fidelity);
    kept.ready = true;
  } else {
    ++metrics_.purify_discarded;
    if (kept_match) reset(r, ks.memory[1], ctx);
  }
  Payload p;
  p.set("slot", static_cast<std::int64_t>(kept_slot))
      .set("ok", std::int64_t{ok ? 1 : 0})
      .set("fid", fid)
      .set("kept", e.payload.integer("kept"));
  send_router(r, ks.router[0], ctx.now() + cc_, "purified", std::move(p), ctx);
  if (ok) try_progress(r, ks.flow, ks.chain, ctx);
}

void QuantumNetwork::on_purified(const Event& e, sync::Context& ctx) {
  const auto kept_slot = static_cast<std::size_t>(e.payload.integer("slot"));
  const Slot& ks = layout_->slots()[kept_slot];
  const topo::RouterId r = e.target;
  MemoryState& kept = mem(r, ks.memory[0]);
  // A reset since the request (expiry) moved the epoch on; the answer is stale.
  if (!kept.purifying || static_cast<std::int64_t>(kept.epoch) != e.payload.integer("kept")) return;
  kept.purifying = false;
  if (e.payload.integer("ok") == 1) {
    kept.fidelity = e.payload.real("fid");
    kept.ready = true;
    try_progress(r, ks.flow, ks.chain, ctx);
  } else {
    reset(r, ks.memory[0], ctx);
  }
}

// Swapping and delivery ---------------------------------------------------

void QuantumNetwork::try_progress(topo::RouterId r, std::size_t flow, std::size_t chain, sync::Context& ctx) {
  const topo::Flow& f = layout_->spec().flows[flow];
  const std::size_t j = layout_->position(flow, r);
  if (j == 0) return;
  const MemoryState& left = mem(r, layout_->slots()[layout_->slot_index(flow, j - 1, chain)].memory[1]);
  if (left.status != MemoryStatus::kEntangled || !left.ready) return;
  if (j >= 2 && !left.linked) return;
  if (j == f.hops()) return deliver(r, flow, chain, ctx);
  const MemoryState& right = mem(r, layout_->slots()[layout_->slot_index(flow, j, chain)].memory[0]);
  if (right.status == MemoryStatus::kEntangled && right.ready) swap(r, flow, chain, j, ctx);
}

void QuantumNetwork::swap(topo::RouterId r, std::size_t flow, std::size_t chain, std::size_t j, sync::Context& ctx) {
  const topo::Flow& f = layout_->spec().flows[flow];
  const std::uint32_t li = layout_->slots()[layout_->slot_index(flow, j - 1, chain)].memory[1];
  const std::uint32_t ri = layout_->slots()[layout_->slot_index(flow, j, chain)].memory[0];
  MemoryState& left = mem(r, li);
  MemoryState& right = mem(r, ri);
  RngStream& g = rng(r);
  Payload p;
  p.set("flow", static_cast<std::int64_t>(flow)).set("chain", static_cast<std::int64_t>(chain));
  if (g.next() < layout_->hw().swap_success) {
    const QubitKey keys[2] = {layout_->memories(r)[li].key, layout_->memories(r)[ri].key};
    const auto out = ctx.qsm().run(circuits::bell_measurement(), std::span<const QubitKey>(keys, 2), g.next());
    ++metrics_.swaps;
    const std::int64_t origin = j == 1 ? left.peer_epoch : left.origin_epoch;
    p.set("m0", std::int64_t{bit(out, 0)})
        .set("m1", std::int64_t{bit(out, 1)})
        .set("fid", left.fidelity * right.fidelity)
        .set("origin", origin);
    for (MemoryState* m : {&left, &right}) {
      m->status = MemoryStatus::kRaw;
      ++m->epoch;
      m->ready = m->linked = false;
      m->origin_epoch = m->peer_epoch = -1;
    }
    send_router(r, f.path[j + 1], ctx.now() + cc_, "swapinfo", std::move(p), ctx);
    return;
  }
  ++metrics_.swap_failures;
  reset(r, li, ctx);
  reset(r, ri, ctx);
  send_router(r, f.path[0], ctx.now() + cc_, "swapfail", p, ctx);
  send_router(r, f.path[j + 1], ctx.now() + cc_, "swapfail", std::move(p), ctx);
}

void QuantumNetwork::on_swapinfo(const Event& e, sync::Context& ctx) {
  const auto flow = static_cast<std::size_t>(e.payload.integer("flow"));
  const auto chain = static_cast<std::size_t>(e.payload.integer("chain"));
  const topo::RouterId r = e.target;
  const std::size_t j = layout_->position(flow, r);
  const std::uint32_t li = layout_->slots()[layout_->slot_index(flow, j - 1, chain)].memory[1];
  MemoryState& left = mem(r, li);
  if (left.status != MemoryStatus::kEntangled) {
    // The pair this swap extended is gone (expired); the source must restart.
    Payload p;
    p.set("flow", static_cast<std::int64_t>(flow)).set("chain", static_cast<std::int64_t>(chain));
    send_router(r, layout_->spec().flows[flow].path[0], ctx.now() + cc_, "swapfail", std::move(p), ctx);
    return;
  }
  correct(r, li, static_cast<int>(e.payload.integer("m0")), static_cast<int>(e.payload.integer("m1")), ctx);
  left.fidelity = e.payload.real("fid");
  left.origin_epoch = e.payload.integer("origin");
  left.linked = true;
  try_progress(r, flow, chain, ctx);
}

void QuantumNetwork::on_swapfail(const Event& e, sync::Context& ctx) {
  const auto flow = static_cast<std::size_t>(e.payload.integer("flow"));
  const auto chain = static_cast<std::size_t>(e.payload.integer("chain"));
  const topo::RouterId r = e.target;
  const std::size_t j = layout_->position(flow, r);
  const std::uint32_t mi = j == 0 ? layout_->slots()[layout_->slot_index(flow, 0, chain)].memory[0]
                                  : layout_->slots()[layout_->slot_index(flow, j - 1, chain)].memory[1];
  if (mem(r, mi).status == MemoryStatus::kEntangled) reset(r, mi, ctx);
}

void QuantumNetwork::deliver(topo::RouterId r, std::size_t flow, std::size_t chain, sync::Context& ctx) {
  const topo::Flow& f = layout_->spec().flows[flow];
  const std::uint32_t li = layout_->slots()[layout_->slot_index(flow, f.hops() - 1, chain)].memory[1];
  MemoryState& left = mem(r, li);
  const QubitKey key = layout_->memories(r)[li].key;
  if (opts_.verify_pairs) {
    ++metrics_.verified;
    const quantum::Ket k = ctx.qsm().get(key);
    const QubitKey src = layout_->memories(f.path[0])[layout_->slots()[layout_->slot_index(flow, 0, chain)].memory[0]].key;
    const bool ok = k.width() == 2 && k.contains(src) &&
                    quantum::fidelity(k, quantum::Ket::epr(k.keys[0], k.keys[1])) > 1.0 - 1e-9;
    if (!ok) ++metrics_.verify_failures;
  }
  Payload p;
  p.set("flow", static_cast<std::int64_t>(flow))
      .set("chain", static_cast<std::int64_t>(chain))
      .set("fid", left.fidelity)
      .set("origin", f.hops() == 1 ? left.peer_epoch : left.origin_epoch);
  reset(r, li, ctx);
  send_router(r, f.path[0], ctx.now() + cc_, "delivered", std::move(p), ctx);
}

void QuantumNetwork::on_delivered(const Event& e, sync::Context& ctx) {
  const auto flow = static_cast<std::size_t>(e.payload.integer("flow"));
  const auto chain = static_cast<std::size_t>(e.payload.integer("chain"));
  const topo::RouterId r = e.target;
  const std::uint32_t mi = layout_->slots()[layout_->slot_index(flow, 0, chain)].memory[0];
  const MemoryState& m = mem(r, mi);
  if (m.status != MemoryStatus::kEntangled || static_cast<std::int64_t>(m.epoch) != e.payload.integer("origin")) return;
  FlowMetrics& fm = metrics_.flows[flow];
  ++fm.delivered;
  fm.fidelity_sum += e.payload.real("fid");
  fm.first_delivery = std::min(fm.first_delivery, ctx.now());
  reset(r, mi, ctx);
}

}  // namespace qpdes::net

#include "qpdes/sync/lookahead.hpp"

#include <algorithm>

#include "qpdes/core/error.hpp"

namespace qpdes::sync {

std::string_view to_string(LookaheadMode m) {
  return m == LookaheadMode::kBaseline ? "baseline" : "half_classical";
}

LookaheadMode parse_lookahead_mode(std::string_view s) {
  if (s == "baseline") return LookaheadMode::kBaseline;
  if (s == "half_classical") return LookaheadMode::kHalfClassical;
  fail(ErrorCode::kValidationError, "lookahead: unknown mode '" + std::string(s) + "'");
}

Lookahead compute_lookahead(LookaheadMode mode, const std::vector<LinkTiming>& links,
                            const std::vector<WorkerId>& owner, std::size_t workers, SimTime end_time) {
  auto owner_of = [&](EntityId e) {
    if (e >= owner.size()) fail(ErrorCode::kUnknownEntity, "entity " + std::to_string(e) + " has no owner");
    return owner[e];
  };
  std::vector<const LinkTiming*> cut;
  for (const LinkTiming& l : links) {
    if (owner_of(l.left) != owner_of(l.right)) cut.push_back(&l);
  }
  Lookahead out{end_time, SimTime::zero(), {}};
  if (workers <= 1 || cut.empty()) return out;

  if (mode == LookaheadMode::kBaseline) {
    SimTime w = SimTime::infinity();
    for (const LinkTiming* l : cut) w = std::min({w, l->quantum_delay, l->classical_delay});
    out.window = w;
    return out;
  }

  SimTime lag = SimTime::infinity();
  for (const LinkTiming* l : cut) {
    const SimTime half(l->classical_delay.ticks() / 2);
    if (half <= l->quantum_delay) {
      fail(ErrorCode::kModeInapplicable, "half-classical lookahead needs T_cc/2 > T_qc on link " +
                                             std::to_string(l->left) + "-" + std::to_string(l->right));
    }
    lag = std::min(lag, half);
  }
  // Every cut-link BSM shares one lag so the lagged queue keeps a single clock.
  out.window = lag;
  out.lag = lag;
  for (const LinkTiming* l : cut) out.lagged.push_back(l->bsm);
  std::sort(out.lagged.begin(), out.lagged.end());
  return out;
}

}  // namespace qpdes::sync

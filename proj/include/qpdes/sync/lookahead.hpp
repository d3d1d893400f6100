#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qpdes/core/sim_time.hpp"
#include "qpdes/event/event.hpp"

namespace qpdes::sync {

enum class LookaheadMode { kBaseline, kHalfClassical };

std::string_view to_string(LookaheadMode m);
/// Accepts "baseline" and "half_classical"; throws ValidationError otherwise.
LookaheadMode parse_lookahead_mode(std::string_view s);

/// One elementary link as the synchronizer sees it: two routers, the BSM
/// node in the middle, and the one-way delays out of each router.
struct LinkTiming {
  EntityId left = 0;
  EntityId right = 0;
  EntityId bsm = 0;
  /// Router to BSM photon flight time.
  SimTime quantum_delay;
  /// Router to router classical delay; also the BSM herald fan-out bound.
  SimTime classical_delay;
};

struct Lookahead {
  /// Window width added to the global minimum.
  SimTime window;
  /// Clock offset of lagged entities (zero in baseline mode).
  SimTime lag;
  std::vector<EntityId> lagged;
};

/// Derives the window width for a partition.
///
/// Baseline: the smallest delay of any event that can cross workers, i.e.
/// router-to-BSM flights and router-to-router messages on links whose
/// endpoints live on different workers.
/// Half-classical: BSM nodes of cut links run lagged by T_cc/2, which becomes
/// the window. Requires T_cc/2 > T_qc on every cut link (ModeInapplicable).
/// With one worker, or no cut link, the window is `end_time`.
Lookahead compute_lookahead(LookaheadMode mode, const std::vector<LinkTiming>& links,
                            const std::vector<WorkerId>& owner, std::size_t workers, SimTime end_time);

}  // namespace qpdes::sync

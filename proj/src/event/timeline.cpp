#include "qpdes/event/timeline.hpp"

namespace qpdes {

void Timeline::mark_lagged(EntityId id) {
  if (lagged_.size() <= id) lagged_.resize(id + 1, false);
  lagged_[id] = true;
}

void Timeline::schedule(Event e) {
  const SimTime vt = virtual_time(e);
  if (vt < local_time_) {
    fail(ErrorCode::kSchedulingInPast, describe(e) + " before local time " + local_time_.str());
  }
  queue_for(e.target).push(std::move(e));
}

SimTime Timeline::main_head() const {
  if (main_.empty() || main_.min_time() >= horizon_) return SimTime::infinity();
  return main_.min_time();
}

SimTime Timeline::lagged_head() const {
  if (lagged_queue_.empty() || lagged_queue_.min_time() >= horizon_) return SimTime::infinity();
  return lagged_queue_.min_time() + lag_;
}

SimTime Timeline::min_time() const { return std::min(main_head(), lagged_head()); }

std::uint64_t Timeline::next_seq(EntityId source) {
  if (seq_.size() <= source) seq_.resize(source + 1, 0);
  return seq_[source]++;
}

std::size_t Timeline::run_until(SimTime stop) {
  if (stop < local_time_) {
    fail(ErrorCode::kPrecondition, "run_until " + stop.str() + " before local time " + local_time_.str());
  }
  std::size_t count = 0;
  for (;;) {
    const SimTime main_vt = main_head();
    const SimTime lag_vt = lagged_head();
    EventQueue* q = nullptr;
    SimTime vt;
    if (main_vt <= lag_vt) {
      q = &main_;
      vt = main_vt;
    } else {
      q = &lagged_queue_;
      vt = lag_vt;
    }
    if (vt >= stop || vt.is_infinite()) break;
    Event e = q->pop();
    local_time_ = vt;
    now_ = e.key.time;
    if (observer_) observer_(e);
    try {
      if (dispatch_) dispatch_(e);
    } catch (const Error& err) {
      // Simulator errors keep their code so callers can still tell them apart.
      throw Error(err.code(), describe(e) + ": " + err.what());
    } catch (const std::exception& err) {
      throw Error(ErrorCode::kHandlerFailure, describe(e) + ": " + err.what());
    }
    ++count;
    ++executed_;
  }
  local_time_ = stop;
  now_ = stop;
  return count;
}

}  // namespace qpdes

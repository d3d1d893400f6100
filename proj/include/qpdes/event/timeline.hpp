#pragma once

#include <functional>
#include <vector>

#include "qpdes/event/event_queue.hpp"

namespace qpdes {

/// Sequential event core for one worker.
///
/// Entities may be marked "lagged": they get their own queue and run on a
/// clock that trails the main clock by `lag`. Both queues are merged on
/// virtual time (event time, plus `lag` for lagged targets), which is the
/// time base the window loop synchronizes on. With no lagged entities,
/// virtual time equals event time.
class Timeline {
 public:
  using Dispatch = std::function<void(const Event&)>;
  using Observer = std::function<void(const Event&)>;

  Timeline() = default;

  void set_dispatch(Dispatch d) { dispatch_ = std::move(d); }
  void set_observer(Observer o) { observer_ = std::move(o); }

  void set_lag(SimTime lag) { lag_ = lag; }
  SimTime lag() const { return lag_; }
  void mark_lagged(EntityId id);
  bool is_lagged(EntityId id) const { return id < lagged_.size() && lagged_[id]; }

  SimTime virtual_time(const Event& e) const { return is_lagged(e.target) ? e.key.time + lag_ : e.key.time; }

  /// Events with real time at or past the horizon never run and do not count
  /// as pending work. Bounding real time (not virtual time) keeps the set of
  /// executed events independent of which entities are lagged.
  void set_horizon(SimTime h) { horizon_ = h; }
  SimTime horizon() const { return horizon_; }

  /// Throws SchedulingInPast when the event's virtual time precedes local time.
  void schedule(Event e);

  /// Executes every event with virtual time strictly below `stop`, in
  /// virtual-time order (sort key within a queue), then sets local time to
  /// `stop`. Returns the number of executed events.
  std::size_t run_until(SimTime stop);

  /// Earliest virtual time among events before the horizon, or infinity.
  SimTime min_time() const;
  std::size_t pending() const { return main_.size() + lagged_queue_.size(); }

  SimTime local_time() const { return local_time_; }
  /// Real time of the event being executed (local time when idle).
  SimTime now() const { return now_; }

  std::uint64_t next_seq(EntityId source);
  std::uint64_t executed() const { return executed_; }

 private:
  EventQueue& queue_for(EntityId target) { return is_lagged(target) ? lagged_queue_ : main_; }
  /// Queue heads in virtual time; infinity when empty or past the horizon.
  SimTime main_head() const;
  SimTime lagged_head() const;

  EventQueue main_;
  EventQueue lagged_queue_;
  std::vector<bool> lagged_;
  std::vector<std::uint64_t> seq_;
  SimTime lag_ = SimTime::zero();
  SimTime horizon_ = SimTime::infinity();
  SimTime local_time_ = SimTime::zero();
  SimTime now_ = SimTime::zero();
  std::uint64_t executed_ = 0;
  Dispatch dispatch_;
  Observer observer_;
};

}  // namespace qpdes

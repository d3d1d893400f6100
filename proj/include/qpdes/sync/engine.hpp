#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qpdes/event/timeline.hpp"
#include "qpdes/qsm/local_qsm.hpp"
#include "qpdes/server/channel.hpp"

namespace qpdes::sync {

enum class TransportKind { kInHost, kSocket };

std::string_view to_string(TransportKind k);
TransportKind parse_transport(std::string_view s);

class Worker;

/// What a model sees while handling an event.
class Context {
 public:
  explicit Context(Worker& w) : w_(w) {}

  /// Real time of the event being handled.
  SimTime now() const;
  WorkerId worker() const;
  WorkerId owner(EntityId e) const;
  bool is_local(EntityId e) const { return owner(e) == worker(); }
  /// Creates an event from `source` (which must live on this worker). Events
  /// for remote targets are queued for the next exchange; their virtual time
  /// must not precede the current window end (CausalityViolation).
  void schedule(EntityId source, EntityId target, SimTime at, std::string handler, Payload payload = {});
  qsm::LocalQsm& qsm();

 private:
  Worker& w_;
};

/// Per-worker slice of a simulation model. One instance per worker; it only
/// acts on entities the partition assigns to that worker.
class Model {
 public:
  virtual ~Model() = default;
  /// Seeds initial events at time >= 0.
  virtual void start(Context& ctx) = 0;
  virtual void handle(const Event& e, Context& ctx) = 0;
  /// Called once after the last window, before the QSM is flushed.
  virtual void finish(Context&) {}
};

struct TraceRecord {
  SortKey key;
  EntityId target = 0;
  std::string handler;
  std::uint64_t digest = 0;

  bool operator==(const TraceRecord&) const = default;
};

struct WorkerStats {
  WorkerId worker = 0;
  std::uint64_t windows = 0;
  std::uint64_t executed = 0;
  std::uint64_t events_sent = 0;
  std::uint64_t events_received = 0;
  /// Exchange payload bytes, duplicates included.
  std::uint64_t bytes_sent = 0;
  double total_seconds = 0;
  double computing_seconds = 0;
  double communicating_seconds = 0;
  double waiting_seconds = 0;
  double socket_seconds = 0;
  /// Largest gap, within one window, between the main clock and a lagged
  /// entity's clock. Must stay <= 2 * lag.
  SimTime max_lag_observed;
  qsm::QsmCounters qsm;
};

/// Called by worker 0 once per window while every worker is parked between
/// two barriers. In-host transport only.
using AuditHook = std::function<void(std::uint64_t window, std::span<qsm::LocalQsm* const> qsms,
                                     std::span<Model* const> models)>;

struct RunSpec {
  std::size_t workers = 1;
  /// owner[entity] = worker.
  std::vector<WorkerId> owner;
  std::vector<EntityId> lagged;
  SimTime lag;
  SimTime lookahead;
  /// Events run iff their real time is below end_time.
  SimTime end_time;
  TransportKind transport = TransportKind::kInHost;
  /// Each exchanged event is sent 1 + duplication times; receivers dedup.
  unsigned duplication = 0;
  bool record_trace = false;
  AuditHook audit;
  std::function<std::unique_ptr<Model>(WorkerId)> make_model;
  /// Null: workers get no global QSM (fine for one worker).
  std::function<std::unique_ptr<server::Channel>(WorkerId)> make_channel;
  qsm::QsmOptions qsm_options;
};

struct RunResult {
  std::vector<WorkerStats> workers;
  /// Every executed event, merged across workers and sorted by key.
  std::vector<TraceRecord> trace;
  std::vector<std::unique_ptr<Model>> models;
  double wall_seconds = 0;

  std::uint64_t executed() const;
  std::uint64_t windows() const { return workers.empty() ? 0 : workers.front().windows; }
};

/// Runs the conservative window loop on `spec.workers` threads and joins.
/// The first worker error is rethrown after all threads stop.
RunResult run(const RunSpec& spec);

/// Smallest virtual time among pending events and queued outgoing events.
SimTime compute_local_min(SimTime queue_min, SimTime outq_min);

}  // namespace qpdes::sync

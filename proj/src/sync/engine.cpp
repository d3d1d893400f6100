#include "qpdes/sync/engine.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <mutex>
#include <thread>

#include "qpdes/event/wire.hpp"
#include "qpdes/sync/transport.hpp"

namespace qpdes::sync {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// A local minimum of -1 ps tells peers this worker failed and everyone stops.
constexpr SimTime kAbort(-1);

}  // namespace

std::string_view to_string(TransportKind k) { return k == TransportKind::kInHost ? "inhost" : "socket"; }

TransportKind parse_transport(std::string_view s) {
  if (s == "inhost") return TransportKind::kInHost;
  if (s == "socket") return TransportKind::kSocket;
  fail(ErrorCode::kValidationError, "transport: unknown kind '" + std::string(s) + "'");
}

SimTime compute_local_min(SimTime queue_min, SimTime outq_min) { return std::min(queue_min, outq_min); }

std::uint64_t RunResult::executed() const {
  std::uint64_t n = 0;
  for (const WorkerStats& w : workers) n += w.executed;
  return n;
}

class Worker {
 public:
  Worker(const RunSpec& spec, WorkerId id, Transport& transport)
      : spec_(spec), id_(id), transport_(transport), outq_(spec.workers), memo_(1024) {
    timeline_.set_lag(spec.lag);
    for (EntityId e : spec.lagged) timeline_.mark_lagged(e);
    timeline_.set_horizon(spec.end_time);
    model_ = spec.make_model(id);
    std::unique_ptr<server::Channel> channel;
    if (spec.make_channel) channel = spec.make_channel(id);
    qsm_ = std::make_unique<qsm::LocalQsm>(id, spec.qsm_options, std::move(channel), &memo_);
    timeline_.set_dispatch([this](const Event& e) { on_event(e); });
    stats_.worker = id;
  }

  void run_loop(std::atomic<bool>& failed_flag, std::vector<qsm::LocalQsm*>& all_qsms,
                std::vector<Model*>& all_models);

  WorkerStats stats_;
  std::vector<TraceRecord> trace_;
  std::unique_ptr<Model> model_;
  std::unique_ptr<qsm::LocalQsm> qsm_;
  std::exception_ptr error_;
  bool peer_abort_ = false;

 private:
  friend class Context;

  void on_event(const Event& e) {
    if (spec_.record_trace) trace_.push_back(TraceRecord{e.key, e.target, e.handler, digest(e)});
    if (timeline_.is_lagged(e.target)) {
      window_lagged_min_ = std::min(window_lagged_min_, e.key.time);
    } else {
      window_main_max_ = std::max(window_main_max_, e.key.time);
    }
    Context ctx(*this);
    model_->handle(e, ctx);
  }

  void send(Event e) {
    if (e.target >= spec_.owner.size()) fail(ErrorCode::kUnknownEntity, "no owner for entity " + std::to_string(e.target));
    const WorkerId dest = spec_.owner[e.target];
    e.dest_worker = dest;
    if (dest == id_) {
      timeline_.schedule(std::move(e));
      return;
    }
    const SimTime vt = timeline_.virtual_time(e);
    if (vt < window_end_) {
      fail(ErrorCode::kCausalityViolation, "remote event " + describe(e) + " at virtual " + vt.str() +
                                               " precedes window end " + window_end_.str());
    }
    outq_min_ = std::min(outq_min_, vt);
    outq_[dest].push_back(std::move(e));
  }

  std::vector<std::string> drain_outq() {
    std::vector<std::string> bytes(spec_.workers);
    for (std::size_t w = 0; w < spec_.workers; ++w) {
      for (const Event& e : outq_[w]) {
        const std::size_t before = bytes[w].size();
        wire::encode(e, bytes[w]);
        const std::string one = bytes[w].substr(before);
        for (unsigned k = 0; k < spec_.duplication; ++k) bytes[w] += one;
      }
      stats_.events_sent += outq_[w].size();
      stats_.bytes_sent += bytes[w].size();
      outq_[w].clear();
    }
    outq_min_ = SimTime::infinity();
    return bytes;
  }

  void merge(const std::vector<std::string>& incoming) {
    std::vector<Event> in;
    for (std::size_t w = 0; w < incoming.size(); ++w) {
      if (w == id_ || incoming[w].empty()) continue;
      std::vector<Event> part = wire::decode_all(incoming[w]);
      for (Event& e : part) in.push_back(std::move(e));
    }
    std::sort(in.begin(), in.end(), [](const Event& a, const Event& b) { return a.key < b.key; });
    in.erase(std::unique(in.begin(), in.end(), [](const Event& a, const Event& b) { return a.key == b.key; }),
             in.end());
    for (Event& e : in) {
      if (timeline_.virtual_time(e) < timeline_.local_time()) {
        fail(ErrorCode::kCausalityViolation, "received " + describe(e) + " behind local time " +
                                                 timeline_.local_time().str());
      }
      ++stats_.events_received;
      timeline_.schedule(std::move(e));
    }
  }

  const RunSpec& spec_;
  WorkerId id_;
  Transport& transport_;
  Timeline timeline_;
  std::vector<std::vector<Event>> outq_;
  SimTime outq_min_ = SimTime::infinity();
  SimTime window_end_ = SimTime::zero();
  SimTime window_main_max_ = SimTime::zero();
  SimTime window_lagged_min_ = SimTime::infinity();
  quantum::UnitaryMemo memo_;
};

SimTime Context::now() const { return w_.timeline_.now(); }
WorkerId Context::worker() const { return w_.id_; }
WorkerId Context::owner(EntityId e) const {
  if (e >= w_.spec_.owner.size()) fail(ErrorCode::kUnknownEntity, "no owner for entity " + std::to_string(e));
  return w_.spec_.owner[e];
}
qsm::LocalQsm& Context::qsm() { return *w_.qsm_; }

void Context::schedule(EntityId source, EntityId target, SimTime at, std::string handler, Payload payload) {
  if (owner(source) != w_.id_) fail(ErrorCode::kPrecondition, "entity " + std::to_string(source) + " is not local");
  Event e;
  e.key = SortKey{at, source, w_.timeline_.next_seq(source)};
  e.target = target;
  e.handler = std::move(handler);
  e.payload = std::move(payload);
  w_.send(std::move(e));
}

void Worker::run_loop(std::atomic<bool>& failed_flag, std::vector<qsm::LocalQsm*>& all_qsms,
                      std::vector<Model*>& all_models) {
  const auto t_start = Clock::now();
  const double socket_before = qsm_->counters().socket_seconds;
  bool failed = false;
  try {
    Context ctx(*this);
    model_->start(ctx);
  } catch (...) {
    error_ = std::current_exception();
    failed = true;
    failed_flag = true;
  }

  SimTime local_time = SimTime::zero();
  while (true) {
    // Communicate.
    auto t = Clock::now();
    const SimTime local_min = failed ? kAbort : compute_local_min(timeline_.min_time(), outq_min_);
    std::vector<std::string> out = failed ? std::vector<std::string>(spec_.workers) : drain_outq();
    stats_.communicating_seconds += since(t);
    ExchangeResult ex = transport_.exchange(std::move(out), local_min);
    stats_.communicating_seconds += ex.transfer_seconds;
    stats_.waiting_seconds += ex.wait_seconds;
    if (std::any_of(ex.mins.begin(), ex.mins.end(), [](SimTime m) { return m == kAbort; })) {
      if (!failed) peer_abort_ = true;
      break;
    }
    const SimTime global_min = *std::min_element(ex.mins.begin(), ex.mins.end());
    // A lagged entity's last events before end_time run at virtual time up to end_time + lag.
    const SimTime stop = spec_.end_time + spec_.lag;
    const SimTime sync_time = std::min(global_min + spec_.lookahead, stop);

    try {
      t = Clock::now();
      merge(ex.incoming);
      stats_.communicating_seconds += since(t);
      if (global_min.is_infinite() || local_time >= stop) break;

      // Execute.
      window_end_ = sync_time;
      window_main_max_ = SimTime::zero();
      window_lagged_min_ = SimTime::infinity();
      t = Clock::now();
      const double sock0 = qsm_->counters().socket_seconds;
      stats_.executed += timeline_.run_until(sync_time);
      stats_.computing_seconds += since(t) - (qsm_->counters().socket_seconds - sock0);
      if (!window_lagged_min_.is_infinite() && window_main_max_ > window_lagged_min_) {
        const SimTime gap = window_main_max_ - window_lagged_min_;
        stats_.max_lag_observed = std::max(stats_.max_lag_observed, gap);
        if (gap > spec_.lag + spec_.lag) {
          fail(ErrorCode::kCausalityViolation, "lagged clock trails by " + gap.str());
        }
      }
      local_time = sync_time;
      ++stats_.windows;
      qsm_->window_barrier();
    } catch (...) {
      error_ = std::current_exception();
      failed = true;
      failed_flag = true;
    }

    if (spec_.audit) {
      stats_.waiting_seconds += transport_.barrier();
      if (id_ == 0 && !failed_flag) {
        try {
          spec_.audit(stats_.windows, all_qsms, all_models);
        } catch (...) {
          error_ = std::current_exception();
          failed = true;
          failed_flag = true;
        }
      }
      stats_.waiting_seconds += transport_.barrier();
    }
  }

  if (!failed && !peer_abort_) {
    try {
      Context ctx(*this);
      model_->finish(ctx);
      qsm_->window_barrier();
    } catch (...) {
      error_ = std::current_exception();
      failed_flag = true;
    }
  }
  stats_.executed = timeline_.executed();
  stats_.qsm = qsm_->counters();
  stats_.socket_seconds = qsm_->counters().socket_seconds - socket_before;
  stats_.total_seconds = since(t_start);
}

namespace {

/// Keeps the error code; the message gains the worker id.
[[noreturn]] void rethrow_attributed(const std::exception_ptr& e, WorkerId id) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    std::string_view what = err.what();
    const std::string prefix = std::string(to_string(err.code())) + ": ";
    if (what.starts_with(prefix)) what.remove_prefix(prefix.size());
    throw Error(err.code(), "worker " + std::to_string(id) + ": " + std::string(what));
  } catch (const std::exception& err) {
    throw Error(ErrorCode::kHandlerFailure, "worker " + std::to_string(id) + ": " + err.what());
  }
}

}  // namespace

RunResult run(const RunSpec& spec) {
  if (spec.workers == 0) fail(ErrorCode::kPrecondition, "need at least one worker");
  if (!spec.make_model) fail(ErrorCode::kPrecondition, "no model factory");
  for (WorkerId w : spec.owner) {
    if (w >= spec.workers) fail(ErrorCode::kPrecondition, "owner refers to worker " + std::to_string(w));
  }
  if (spec.audit && spec.transport != TransportKind::kInHost) {
    fail(ErrorCode::kPrecondition, "window audits need the in-host transport");
  }

  const auto t0 = Clock::now();
  const std::size_t n = spec.workers;
  std::vector<std::unique_ptr<Worker>> workers(n);
  std::vector<qsm::LocalQsm*> qsms(n, nullptr);
  std::vector<Model*> models(n, nullptr);
  std::atomic<bool> failed{false};
  std::vector<std::exception_ptr> setup_errors(n);

  InHostHub hub(n);
  std::vector<std::uint16_t> ports(n, 0);
  std::barrier<> startup(static_cast<std::ptrdiff_t>(n));
  std::barrier<> ready(static_cast<std::ptrdiff_t>(n));

  auto body = [&](WorkerId id) {
    std::unique_ptr<Transport> transport;
    try {
      if (spec.transport == TransportKind::kInHost) {
        transport = std::make_unique<InHostTransport>(hub, id);
      } else {
        transport = std::make_unique<SocketTransport>(id, n, ports, startup);
      }
      workers[id] = std::make_unique<Worker>(spec, id, *transport);
      qsms[id] = workers[id]->qsm_.get();
      models[id] = workers[id]->model_.get();
    } catch (...) {
      setup_errors[id] = std::current_exception();
      failed = true;
    }
    ready.arrive_and_wait();
    if (failed) return;
    workers[id]->run_loop(failed, qsms, models);
  };

  if (n == 1) {
    body(0);
  } else {
    std::vector<std::thread> threads;
    for (WorkerId id = 0; id < n; ++id) threads.emplace_back(body, id);
    for (std::thread& th : threads) th.join();
  }

  for (WorkerId id = 0; id < n; ++id) {
    if (setup_errors[id]) rethrow_attributed(setup_errors[id], id);
  }
  for (WorkerId id = 0; id < n; ++id) {
    if (workers[id]->error_) rethrow_attributed(workers[id]->error_, id);
  }

  RunResult res;
  for (auto& w : workers) {
    res.workers.push_back(w->stats_);
    for (TraceRecord& r : w->trace_) res.trace.push_back(std::move(r));
    res.models.push_back(std::move(w->model_));
  }
  std::sort(res.trace.begin(), res.trace.end(), [](const TraceRecord& a, const TraceRecord& b) { return a.key < b.key; });
  res.wall_seconds = since(t0);
  return res;
}

}  // namespace qpdes::sync

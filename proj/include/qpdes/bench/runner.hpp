#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpdes/bench/config.hpp"
#include "qpdes/net/model.hpp"

namespace qpdes::bench {

inline constexpr int kReportVersion = 1;

struct WorkerReport {
  WorkerId worker = 0;
  double total_seconds = 0;
  double computing_seconds = 0;
  double communicating_seconds = 0;
  double waiting_seconds = 0;
  double socket_seconds = 0;
  std::uint64_t windows = 0;
  std::uint64_t executed_events = 0;
  std::uint64_t events_sent = 0;
  std::uint64_t events_received = 0;
  std::uint64_t exchange_bytes = 0;
  std::uint64_t qsm_requests = 0;
  std::uint64_t qsm_requests_local = 0;
  /// Requests touching a key that was once under global management.
  std::uint64_t transferred_requests = 0;
  std::uint64_t transferred_requests_local = 0;
  std::uint64_t messages_to_server = 0;
  std::uint64_t server_bytes = 0;
  std::uint64_t batched_items = 0;
  /// Share of QSM requests the server handled.
  double server_request_fraction = 0;
  std::int64_t max_lag_ps = 0;
};

struct RunReport {
  std::string config_hash;
  nlohmann::json config;
  std::size_t workers = 1;
  std::string lookahead_mode;
  std::int64_t window_ps = 0;
  std::int64_t lag_ps = 0;
  std::uint64_t windows = 0;
  std::uint64_t executed_events = 0;
  double wall_seconds = 0;
  net::NetMetrics metrics;
  std::vector<WorkerReport> per_worker;
  std::uint64_t audit_passes = 0;
  std::uint64_t audit_violations = 0;
  std::vector<std::string> audit_samples;
  /// Only with features.trace.
  std::vector<sync::TraceRecord> trace;
  /// Set by compare().
  std::optional<double> speedup;
  std::optional<double> efficiency;

  std::uint64_t messages_to_server() const;
  std::uint64_t exchange_bytes() const;
  /// Local share of all QSM requests.
  double local_request_fraction() const;
};

/// p == 1: one worker, local-only QSM, no server. p > 1: starts a global
/// QSM server (in process or on TCP), partitions, derives the lookahead and
/// runs the window loop. Errors carry the failing worker's context.
RunReport run(const RunConfig& config);

/// speedup = T_s / T_p, efficiency = speedup / p. MismatchedConfig when the
/// config hashes differ or the baseline is not a one-worker run.
void compare(RunReport& report, const RunReport& baseline);

/// Per-worker rows, fixed column order.
std::string workers_csv(const RunReport& r);
nlohmann::json summary_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

/// Writes workers.csv and summary.json into `dir` (created if missing).
void write_report(const RunReport& r, const std::filesystem::path& dir);
RunReport read_report(const std::filesystem::path& dir);

}  // namespace qpdes::bench

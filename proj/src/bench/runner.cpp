#include "qpdes/bench/runner.hpp"

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "qpdes/net/audit.hpp"
#include "qpdes/server/channel.hpp"
#include "qpdes/server/server_core.hpp"

namespace qpdes::bench {

namespace {

WorkerReport worker_report(const sync::WorkerStats& s) {
  WorkerReport w;
  w.worker = s.worker;
  w.total_seconds = s.total_seconds;
  w.computing_seconds = s.computing_seconds;
  w.communicating_seconds = s.communicating_seconds;
  w.waiting_seconds = s.waiting_seconds;
  w.socket_seconds = s.socket_seconds;
  w.windows = s.windows;
  w.executed_events = s.executed;
  w.events_sent = s.events_sent;
  w.events_received = s.events_received;
  w.exchange_bytes = s.bytes_sent;
  w.qsm_requests = s.qsm.requests_total;
  w.qsm_requests_local = s.qsm.requests_local;
  w.transferred_requests = s.qsm.transferred_requests;
  w.transferred_requests_local = s.qsm.transferred_requests_local;
  w.messages_to_server = s.qsm.frames;
  w.server_bytes = s.qsm.bytes_sent;
  w.batched_items = s.qsm.batched_items;
  w.server_request_fraction =
      s.qsm.requests_total == 0 ? 0.0
                                : static_cast<double>(s.qsm.requests_forwarded) / static_cast<double>(s.qsm.requests_total);
  w.max_lag_ps = s.max_lag_observed.ticks();
  return w;
}

nlohmann::json metrics_json(const net::NetMetrics& m) {
  nlohmann::json flows = nlohmann::json::array();
  for (const net::FlowMetrics& f : m.flows) {
    flows.push_back({{"delivered", f.delivered},
                     {"fidelity_sum", f.fidelity_sum},
                     {"first_delivery_ps", f.first_delivery.is_infinite() ? nlohmann::json(nullptr)
                                                                          : nlohmann::json(f.first_delivery.ticks())}});
  }
  return {{"attempts", m.attempts},
          {"emissions", m.emissions},
          {"photons_lost", m.photons_lost},
          {"detections", m.detections},
          {"heralds", m.heralds},
          {"generation_failures", m.generation_failures},
          {"swaps", m.swaps},
          {"swap_failures", m.swap_failures},
          {"expirations", m.expirations},
          {"purify_kept", m.purify_kept},
          {"purify_discarded", m.purify_discarded},
          {"verified", m.verified},
          {"verify_failures", m.verify_failures},
          {"flows", flows}};
}

net::NetMetrics metrics_from_json(const nlohmann::json& j) {
  net::NetMetrics m;
  m.attempts = j.at("attempts");
  m.emissions = j.at("emissions");
  m.photons_lost = j.at("photons_lost");
  m.detections = j.at("detections");
  m.heralds = j.at("heralds");
  m.generation_failures = j.at("generation_failures");
  m.swaps = j.at("swaps");
  m.swap_failures = j.at("swap_failures");
  m.expirations = j.at("expirations");
  m.purify_kept = j.at("purify_kept");
  m.purify_discarded = j.at("purify_discarded");
  m.verified = j.at("verified");
  m.verify_failures = j.at("verify_failures");
  for (const auto& f : j.at("flows")) {
    net::FlowMetrics fm;
    fm.delivered = f.at("delivered");
    fm.fidelity_sum = f.at("fidelity_sum");
    const auto& first = f.at("first_delivery_ps");
    fm.first_delivery = first.is_null() ? SimTime::infinity() : SimTime(first.get<std::int64_t>());
    m.flows.push_back(fm);
  }
  return m;
}

#define QPDES_WORKER_FIELDS(X)                                                                                \
  X(worker) X(total_seconds) X(computing_seconds) X(communicating_seconds) X(waiting_seconds) X(socket_seconds) \
  X(windows) X(executed_events) X(events_sent) X(events_received) X(exchange_bytes) X(qsm_requests)            \
  X(qsm_requests_local) X(transferred_requests) X(transferred_requests_local) X(messages_to_server)            \
  X(server_bytes) X(batched_items) X(server_request_fraction) X(max_lag_ps)

std::uint64_t trace_digest(const std::vector<sync::TraceRecord>& trace) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const sync::TraceRecord& t : trace) {
    mix(static_cast<std::uint64_t>(t.key.time.ticks()));
    mix(t.key.source);
    mix(t.key.seq);
    mix(t.target);
    mix(t.digest);
  }
  return h;
}

}  // namespace

std::uint64_t RunReport::messages_to_server() const {
  std::uint64_t n = 0;
  for (const auto& w : per_worker) n += w.messages_to_server;
  return n;
}

std::uint64_t RunReport::exchange_bytes() const {
  std::uint64_t n = 0;
  for (const auto& w : per_worker) n += w.exchange_bytes;
  return n;
}

double RunReport::local_request_fraction() const {
  std::uint64_t total = 0;
  std::uint64_t local = 0;
  for (const auto& w : per_worker) {
    total += w.qsm_requests;
    local += w.qsm_requests_local;
  }
  return total == 0 ? 0.0 : static_cast<double>(local) / static_cast<double>(total);
}

RunReport run(const RunConfig& config) {
  const topo::NetworkSpec spec = build_network(config);
  const topo::PartitionMap pmap = build_partition(config, spec);
  auto layout = std::make_shared<const net::Layout>(
      spec, config.hardware, net::LayoutOptions{.stagger = config.features.stagger, .seed = config.seed});
  const std::vector<WorkerId> owner = layout->owners(pmap);
  const std::size_t p = config.workers;
  const sync::Lookahead la =
      sync::compute_lookahead(config.lookahead, layout->link_timings(), owner, p, config.end_time());

  std::unique_ptr<server::ServerCore> core;
  std::unique_ptr<server::TcpServer> tcp;
  server::Endpoint endpoint;
  if (p > 1) {
    core = std::make_unique<server::ServerCore>();
    endpoint = server::Endpoint::resolve(config.server_endpoint);
    if (endpoint.kind == server::Endpoint::Kind::kTcp) {
      tcp = std::make_unique<server::TcpServer>(*core, endpoint.host, endpoint.port);
      endpoint.port = tcp->port();
    }
  }

  sync::RunSpec rs;
  rs.workers = p;
  rs.owner = owner;
  rs.lagged = la.lagged;
  rs.lag = la.lag;
  rs.lookahead = la.window;
  rs.end_time = config.end_time();
  rs.transport = config.transport;
  rs.duplication = config.features.duplication_factor;
  rs.record_trace = config.features.trace;
  rs.qsm_options = {.batching = config.features.batching,
                    .offload = config.features.offload,
                    .check_consistency = config.features.audit};
  const net::ModelOptions mo{.seed = config.seed,
                             .purification = config.features.purification,
                             .verify_pairs = config.features.verify_pairs,
                             .end_time = config.end_time()};
  rs.make_model = [layout, mo](WorkerId) { return std::make_unique<net::QuantumNetwork>(layout, mo); };
  if (core) {
    server::ServerCore* c = core.get();
    rs.make_channel = [c, endpoint](WorkerId) -> std::unique_ptr<server::Channel> {
      if (endpoint.kind == server::Endpoint::Kind::kTcp) {
        return std::make_unique<server::TcpChannel>(endpoint.host, endpoint.port);
      }
      return std::make_unique<server::InProcessChannel>(*c);
    };
  }
  net::AuditReport audit;
  if (config.features.audit) {
    if (config.transport != sync::TransportKind::kInHost) {
      fail(ErrorCode::kValidationError, "features.audit: requires the inhost transport");
    }
    const server::ServerCore* c = core.get();
    const bool partners = config.hardware.coherence() >= config.end_time();
    rs.audit = [&audit, layout, owner, c, partners](std::uint64_t, std::span<qsm::LocalQsm* const> qsms,
                                          std::span<sync::Model* const> models) {
      std::vector<const net::QuantumNetwork*> nets;
      for (sync::Model* m : models) nets.push_back(static_cast<const net::QuantumNetwork*>(m));
      net::audit_state(*layout, owner, qsms, nets, c, partners, audit);
    };
  }

  sync::RunResult result = sync::run(rs);
  if (tcp) tcp->stop();

  RunReport r;
  r.config_hash = config_hash(config);
  r.config = nlohmann::json::parse(to_json(config));
  r.workers = p;
  r.lookahead_mode = std::string(sync::to_string(config.lookahead));
  r.window_ps = la.window.ticks();
  r.lag_ps = la.lag.ticks();
  r.windows = result.windows();
  r.executed_events = result.executed();
  r.wall_seconds = result.wall_seconds;
  r.metrics.flows.resize(spec.flows.size());
  for (const auto& m : result.models) r.metrics.merge(static_cast<const net::QuantumNetwork&>(*m).metrics());
  for (const auto& s : result.workers) r.per_worker.push_back(worker_report(s));
  r.audit_passes = audit.passes;
  r.audit_violations = audit.violations;
  r.audit_samples = audit.samples;
  r.trace = std::move(result.trace);
  return r;
}

void compare(RunReport& report, const RunReport& baseline) {
  if (report.config_hash != baseline.config_hash) {
    fail(ErrorCode::kMismatchedConfig,
         "baseline config hash " + baseline.config_hash + " differs from " + report.config_hash);
  }
  if (baseline.workers != 1) {
    fail(ErrorCode::kMismatchedConfig, "baseline must be a one-worker run, got " + std::to_string(baseline.workers));
  }
  if (report.wall_seconds <= 0) fail(ErrorCode::kPrecondition, "report has no wall time");
  report.speedup = baseline.wall_seconds / report.wall_seconds;
  report.efficiency = *report.speedup / static_cast<double>(report.workers);
}

std::string workers_csv(const RunReport& r) {
  std::ostringstream out;
  out << "# qpdes workers v" << kReportVersion << "\n";
  bool first = true;
#define QPDES_HEADER(f)      \
  out << (first ? "" : ","); \
  out << #f;                 \
  first = false;
  QPDES_WORKER_FIELDS(QPDES_HEADER)
#undef QPDES_HEADER
  out << "\n" << std::setprecision(17);
  for (const WorkerReport& w : r.per_worker) {
    first = true;
#define QPDES_CELL(f)        \
  out << (first ? "" : ","); \
  out << w.f;                \
  first = false;
    QPDES_WORKER_FIELDS(QPDES_CELL)
#undef QPDES_CELL
    out << "\n";
  }
  return out.str();
}

nlohmann::json summary_json(const RunReport& r) {
  nlohmann::json workers = nlohmann::json::array();
  for (const WorkerReport& w : r.per_worker) {
    nlohmann::json row = nlohmann::json::object();
#define QPDES_FIELD(f) row[#f] = w.f;
    QPDES_WORKER_FIELDS(QPDES_FIELD)
#undef QPDES_FIELD
    workers.push_back(std::move(row));
  }
  nlohmann::json j = {{"version", kReportVersion},
                      {"config_hash", r.config_hash},
                      {"config", r.config},
                      {"workers", r.workers},
                      {"lookahead_mode", r.lookahead_mode},
                      {"window_ps", r.window_ps},
                      {"lag_ps", r.lag_ps},
                      {"windows", r.windows},
                      {"executed_events", r.executed_events},
                      {"wall_seconds", r.wall_seconds},
                      {"delivered", r.metrics.delivered()},
                      {"messages_to_server", r.messages_to_server()},
                      {"local_request_fraction", r.local_request_fraction()},
                      {"metrics", metrics_json(r.metrics)},
                      {"audit", {{"passes", r.audit_passes}, {"violations", r.audit_violations}, {"samples", r.audit_samples}}},
                      {"per_worker", workers}};
  if (!r.trace.empty()) {
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << trace_digest(r.trace);
    j["trace"] = {{"events", r.trace.size()}, {"digest", hex.str()}};
  }
  j["speedup"] = r.speedup ? nlohmann::json(*r.speedup) : nlohmann::json(nullptr);
  j["efficiency"] = r.efficiency ? nlohmann::json(*r.efficiency) : nlohmann::json(nullptr);
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kReportVersion) {
      fail(ErrorCode::kParseError, "unsupported report version " + j.at("version").dump());
    }
    RunReport r;
    r.config_hash = j.at("config_hash");
    r.config = j.at("config");
    r.workers = j.at("workers");
    r.lookahead_mode = j.at("lookahead_mode");
    r.window_ps = j.at("window_ps");
    r.lag_ps = j.at("lag_ps");
    r.windows = j.at("windows");
    r.executed_events = j.at("executed_events");
    r.wall_seconds = j.at("wall_seconds");
    r.metrics = metrics_from_json(j.at("metrics"));
    r.audit_passes = j.at("audit").at("passes");
    r.audit_violations = j.at("audit").at("violations");
    r.audit_samples = j.at("audit").at("samples").get<std::vector<std::string>>();
    for (const auto& row : j.at("per_worker")) {
      WorkerReport w;
#define QPDES_READ(f) w.f = row.at(#f).get<decltype(w.f)>();
      QPDES_WORKER_FIELDS(QPDES_READ)
#undef QPDES_READ
      r.per_worker.push_back(w);
    }
    if (!j.at("speedup").is_null()) r.speedup = j.at("speedup").get<double>();
    if (!j.at("efficiency").is_null()) r.efficiency = j.at("efficiency").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("report: ") + e.what());
  }
}

void write_report(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "workers.csv");
  csv << workers_csv(r);
  std::ofstream summary(dir / "summary.json");
  summary << summary_json(r).dump(2) << "\n";
  if (!csv || !summary) fail(ErrorCode::kPrecondition, "cannot write report to " + dir.string());
}

RunReport read_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) fail(ErrorCode::kPrecondition, "no summary.json in " + dir.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kParseError, "summary.json in " + dir.string() + " is not valid JSON");
  return report_from_json(j);
}

}  // namespace qpdes::bench

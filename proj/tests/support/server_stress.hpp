#pragma once

// Concurrent RUN load against one server core, plus a serial replay oracle.
// Each client picks two keys at random among a shared pool, so entanglement
// closures overlap constantly. Every RUN is CNOT + measure both wires with
// release off, which keeps state width at most 2 and the pool stable.

#include <chrono>
#include <future>
#include <memory>
#include <random>
#include <thread>
#include <vector>

#include "qpdes/qsm/protocol.hpp"
#include "qpdes/server/channel.hpp"

namespace stress {

struct Result {
  bool finished = false;
  std::size_t runs_ok = 0;
  std::size_t runs_failed = 0;
  double seconds = 0;
  std::vector<qpdes::quantum::Ket> final_states;
  std::vector<qpdes::server::ServerCore::LogEntry> log;
};

inline std::vector<qpdes::QubitKey> pool_keys(std::size_t pairs) {
  qpdes::KeyFactory f(99, 7);
  std::vector<qpdes::QubitKey> out;
  for (std::size_t i = 0; i < 2 * pairs; ++i) out.push_back(f.next());
  return out;
}

inline qpdes::qsm::Request run_request(const qpdes::QubitKey& a, const qpdes::QubitKey& b, double sample, int variant) {
  using namespace qpdes;
  qsm::Request r;
  r.kind = qsm::Kind::kRun;
  r.keys = {a, b};
  quantum::Circuit c(2);
  if (variant == 1) c.add(quantum::Gate::kH, {0});
  if (variant == 2) c.add(quantum::Gate::kS, {1});
  c.add(quantum::Gate::kCnot, {0, 1}).add(quantum::Gate::kH, {0});
  c.measure(variant == 3 ? std::vector<std::size_t>{0} : std::vector<std::size_t>{0, 1});
  r.circuit = c;
  r.sample = sample;
  return r;
}

/// `tcp` selects real sockets; otherwise clients call the core directly.
inline Result run(std::size_t clients, std::size_t runs_per_client, std::size_t pairs, bool tcp, bool record_log,
                  std::chrono::seconds watchdog) {
  using namespace qpdes;
  server::ServerCore::Options opts;
  opts.record_log = record_log;
  auto core = std::make_shared<server::ServerCore>(opts);
  std::unique_ptr<server::TcpServer> srv;
  if (tcp) srv = std::make_unique<server::TcpServer>(*core, "127.0.0.1", 0);
  const auto keys = pool_keys(pairs);
  const double h = 1 / std::sqrt(2.0);
  std::uint64_t setup_id = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    qsm::Request r;
    r.kind = qsm::Kind::kTransferIn;
    r.id = ++setup_id;
    r.keys = {keys[2 * i], keys[2 * i + 1]};
    r.amplitudes = {h, 0, 0, h};
    core->handle(r);
  }

  struct Shared {
    std::atomic<std::size_t> ok{0}, bad{0};
    std::promise<void> done;
  };
  auto shared = std::make_shared<Shared>();
  const std::uint16_t port = tcp ? srv->port() : 0;
  auto body = [shared, core, keys, tcp, port, runs_per_client](std::size_t id) {
    std::unique_ptr<server::Channel> ch;
    if (tcp) {
      ch = std::make_unique<server::TcpChannel>("127.0.0.1", port);
    } else {
      ch = std::make_unique<server::InProcessChannel>(*core);
    }
    std::mt19937_64 gen(1000 + id);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (std::size_t n = 0; n < runs_per_client; ++n) {
      const std::size_t a = gen() % keys.size();
      std::size_t b = gen() % (keys.size() - 1);
      if (b >= a) ++b;
      qsm::Request r = run_request(keys[a], keys[b], ud(gen), static_cast<int>(gen() % 4));
      r.id = n + 1;
      r.worker = static_cast<WorkerId>(id);
      const qsm::Response resp = qsm::decode_response(ch->roundtrip(qsm::encode(r)));
      (resp.ok ? shared->ok : shared->bad).fetch_add(1);
    }
  };
  auto finished = shared->done.get_future();
  const auto start = std::chrono::steady_clock::now();
  std::thread([shared, body, clients] {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < clients; ++c) threads.emplace_back(body, c);
    for (auto& t : threads) t.join();
    shared->done.set_value();
  }).detach();

  Result res;
  if (finished.wait_for(watchdog) != std::future_status::ready) {
    // Stuck threads keep `shared`, `core` and the server alive; leak them.
    (void)new std::shared_ptr<server::ServerCore>(core);
    (void)srv.release();
    return res;
  }
  res.finished = true;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.runs_ok = shared->ok.load();
  res.runs_failed = shared->bad.load();
  res.final_states = core->snapshot();
  res.log = core->log();
  return res;
}

/// Replays a log on a fresh core in sequence order, single-threaded.
inline std::vector<qpdes::quantum::Ket> replay(const std::vector<qpdes::server::ServerCore::LogEntry>& log) {
  qpdes::server::ServerCore core;
  auto sorted = log;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.seq < y.seq; });
  for (const auto& e : sorted) core.handle(e.request);
  return core.snapshot();
}

}  // namespace stress

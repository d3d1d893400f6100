#include <gtest/gtest.h>

#include <thread>

#include "qpdes/core/error.hpp"
#include "qpdes/qsm/local_qsm.hpp"
#include "server_stress.hpp"

using namespace qpdes;
using namespace qpdes::qsm;
using quantum::Ket;

namespace {

const double r = 1 / std::sqrt(2.0);

std::vector<QubitKey> keys(std::size_t n, std::uint32_t entity) {
  KeyFactory f(2, entity);
  std::vector<QubitKey> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(f.next());
  return out;
}

Request transfer_in(std::vector<QubitKey> k, quantum::Amplitudes a, std::uint64_t id = 1) {
  Request q;
  q.kind = Kind::kTransferIn;
  q.id = id;
  q.keys = std::move(k);
  q.amplitudes = std::move(a);
  return q;
}

Request set_req(std::vector<QubitKey> k, quantum::Amplitudes a, std::uint64_t id = 1) {
  Request q = transfer_in(std::move(k), std::move(a), id);
  q.kind = Kind::kSet;
  return q;
}

}  // namespace

TEST(Server, MalformedMessageGetsErrorWithId) {
  server::ServerCore core;
  const Response resp = decode_response(core.handle_text(R"({"kind":"RUN","id":17,"worker":0})"));
  EXPECT_FALSE(resp.ok);
  EXPECT_EQ(resp.id, 17u);
  EXPECT_EQ(resp.error, "MalformedMessage");
  const Response garbage = decode_response(core.handle_text("{not json"));
  EXPECT_FALSE(garbage.ok);
  EXPECT_EQ(garbage.id, 0u);
}

TEST(Server, RunOnUnknownKeyIsMissingState) {
  server::ServerCore core;
  const auto k = keys(1, 1);
  Request q;
  q.kind = Kind::kRun;
  q.id = 4;
  q.keys = k;
  q.circuit = quantum::Circuit(1).add(quantum::Gate::kX, {0});
  const Response resp = core.handle(q);
  EXPECT_FALSE(resp.ok);
  EXPECT_EQ(resp.error, "MissingState");
}

TEST(Server, EmptyBatchIsAcked) {
  server::ServerCore core;
  Request b;
  b.kind = Kind::kBatch;
  b.id = 1;
  EXPECT_TRUE(core.handle(b).ok);
}

TEST(Server, BatchStopsAtFirstBadItemAndKeepsEarlierOnes) {
  server::ServerCore core;
  const auto k = keys(4, 1);
  Request b;
  b.kind = Kind::kBatch;
  b.id = 9;
  b.items.push_back(set_req({k[0]}, {1, 0}, 1));
  b.items.push_back(set_req({k[1], k[2]}, {1, 0}, 2));  // ill-dimensioned
  b.items.push_back(set_req({k[3]}, {1, 0}, 3));
  const Response resp = core.handle(b);
  EXPECT_FALSE(resp.ok);
  ASSERT_TRUE(resp.index.has_value());
  EXPECT_EQ(*resp.index, 1u);
  EXPECT_EQ(resp.error, "BadDimension");
  EXPECT_TRUE(core.holds(k[0]));
  EXPECT_FALSE(core.holds(k[3]));
}

TEST(Server, BatchedTransfersAreVisibleToLaterRun) {
  server::ServerCore core;
  const auto k = keys(6, 1);
  Request b;
  b.kind = Kind::kBatch;
  b.id = 4;
  for (std::size_t i = 0; i < 3; ++i) b.items.push_back(transfer_in({k[2 * i], k[2 * i + 1]}, {r, 0, 0, r}, i + 1));
  ASSERT_TRUE(core.handle(b).ok);
  Request run;
  run.kind = Kind::kRun;
  run.id = 5;
  run.keys = {k[1], k[3], k[5]};
  quantum::Circuit c(3);
  c.add(quantum::Gate::kCnot, {0, 1}).add(quantum::Gate::kCnot, {1, 2}).measure({0, 1, 2});
  run.circuit = c;
  run.sample = 0.5;
  run.release = true;
  const Response resp = core.handle(run);
  ASSERT_TRUE(resp.ok) << resp.message;
  EXPECT_EQ(resp.outcome.size(), 3u);
  EXPECT_EQ(resp.released.size(), 3u);
  EXPECT_FALSE(core.holds(k[1]));
  EXPECT_TRUE(core.holds(k[0]));
}

TEST(Server, SetReleaseResetsPartnersOnServer) {
  server::ServerCore core;
  const auto k = keys(2, 1);
  ASSERT_TRUE(core.handle(transfer_in(k, {r, 0, 0, r})).ok);
  Request rel;
  rel.kind = Kind::kSet;
  rel.id = 2;
  rel.keys = {k[0]};
  rel.release = true;
  ASSERT_TRUE(core.handle(rel).ok);
  EXPECT_FALSE(core.holds(k[0]));
  const auto snap = core.snapshot();
  ASSERT_EQ(snap.size(), 1u);
  EXPECT_EQ(snap[0], Ket::basis(k[1], 0));
}

TEST(Server, DuplicateTransferIsRejected) {
  server::ServerCore core;
  const auto k = keys(2, 1);
  ASSERT_TRUE(core.handle(transfer_in(k, {r, 0, 0, r})).ok);
  const Response resp = core.handle(transfer_in({k[1]}, {1, 0}, 2));
  EXPECT_FALSE(resp.ok);
  EXPECT_EQ(resp.error, "DuplicateKey");
}

TEST(Server, TcpSessionsEachGetTheirOwnAck) {
  server::ServerCore core;
  server::TcpServer srv(core, "127.0.0.1", 0);
  server::TcpChannel a("127.0.0.1", srv.port()), b("127.0.0.1", srv.port());
  Request sync;
  sync.kind = Kind::kSync;
  sync.id = 11;
  const Response ra = decode_response(a.roundtrip(encode(sync)));
  sync.id = 22;
  const Response rb = decode_response(b.roundtrip(encode(sync)));
  EXPECT_TRUE(ra.ok && rb.ok);
  EXPECT_EQ(ra.id, 11u);
  EXPECT_EQ(rb.id, 22u);
}

TEST(Server, TcpBindFailureAndUnavailableClient) {
  server::ServerCore core;
  server::TcpServer srv(core, "127.0.0.1", 0);
  try {
    server::TcpServer clash(core, "127.0.0.1", srv.port());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBindFailure);
  }
  const std::uint16_t dead_port = srv.port();
  srv.stop();
  try {
    server::TcpChannel ch("127.0.0.1", 1);
    FAIL() << dead_port;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kServerUnavailable);
  }
}

TEST(Server, LocalQsmOverTcpMatchesInProcess) {
  std::vector<Ket> finals[2];
  for (int tcp = 0; tcp < 2; ++tcp) {
    server::ServerCore core;
    std::unique_ptr<server::TcpServer> srv;
    auto channel = [&]() -> std::unique_ptr<server::Channel> {
      if (tcp) return std::make_unique<server::TcpChannel>("127.0.0.1", srv->port());
      return std::make_unique<server::InProcessChannel>(core);
    };
    if (tcp) srv = std::make_unique<server::TcpServer>(core, "127.0.0.1", 0);
    LocalQsm w0(0, {}, channel()), w1(1, {}, channel());
    const auto a = keys(2, 1), b = keys(2, 2);
    w0.set(a, {r, 0, 0, r});
    w1.set(b, {r, 0, 0, r});
    w1.adopt(w0.transfer_out(a[1], true));
    w0.window_barrier();
    const std::vector<QubitKey> photons = {a[1], b[1]};
    const auto out = w1.run(quantum::circuits::bell_measurement(), photons, 0.55);
    w1.run(quantum::circuits::pauli_correction(out[1], out[0]), std::span(&b[0], 1), std::nullopt);
    w1.window_barrier();
    finals[tcp] = core.snapshot();
  }
  EXPECT_EQ(finals[0], finals[1]);
}

TEST(Server, EndpointParsing) {
  EXPECT_EQ(server::Endpoint::parse("inproc").kind, server::Endpoint::Kind::kInProcess);
  const auto e = server::Endpoint::parse("tcp://127.0.0.1:5555");
  EXPECT_EQ(e.kind, server::Endpoint::Kind::kTcp);
  EXPECT_EQ(e.port, 5555);
  EXPECT_EQ(e.str(), "tcp://127.0.0.1:5555");
  EXPECT_THROW(server::Endpoint::parse("udp://x:1"), Error);
  EXPECT_THROW(server::Endpoint::parse("tcp://host"), Error);
}

TEST(Server, ConcurrentRunsMatchSerialReplay) {
  const auto res = stress::run(4, 250, 12, false, true, std::chrono::seconds(60));
  ASSERT_TRUE(res.finished);
  EXPECT_EQ(res.runs_failed, 0u);
  EXPECT_EQ(res.runs_ok, 1000u);
  EXPECT_EQ(stress::replay(res.log), res.final_states);
}

TEST(Server, RacingCorrectionsComposeSequentially) {
  server::ServerCore::Options opts;
  opts.record_log = true;
  server::ServerCore core(opts);
  const auto k = keys(2, 1);
  ASSERT_TRUE(core.handle(transfer_in(k, {r, 0, 0, r})).ok);
  auto correction = [&](quantum::Gate g, const QubitKey& key, WorkerId w) {
    for (int i = 0; i < 200; ++i) {
      Request q;
      q.kind = Kind::kRun;
      q.id = static_cast<std::uint64_t>(i + 1);
      q.worker = w;
      q.keys = {key};
      q.circuit = quantum::Circuit(1).add(g, {0});
      ASSERT_TRUE(core.handle(q).ok);
    }
  };
  std::thread t1(correction, quantum::Gate::kX, k[0], 1);
  std::thread t2(correction, quantum::Gate::kZ, k[1], 2);
  t1.join();
  t2.join();
  EXPECT_EQ(core.log().size(), 401u);
  EXPECT_EQ(stress::replay(core.log()), core.snapshot());
}

#include <gtest/gtest.h>

#include <thread>

#include "qpdes/event/wire.hpp"
#include "qpdes/sync/engine.hpp"
#include "qpdes/sync/lookahead.hpp"
#include "qpdes/sync/transport.hpp"

using namespace qpdes;
using namespace qpdes::sync;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kPrecondition;
}

// Ring of entities. Each ticks every `period`, and every tick sends a message
// `delay` ahead to its right neighbour. Message payloads chain a counter so
// the trace digests depend on delivery order within each entity.
struct Ring : Model {
  std::size_t n;
  SimTime period, delay, stop;
  std::vector<std::int64_t> seen;

  Ring(std::size_t n_, SimTime period_, SimTime delay_, SimTime stop_)
      : n(n_), period(period_), delay(delay_), stop(stop_), seen(n_, 0) {}

  void start(Context& ctx) override {
    for (EntityId e = 0; e < n; ++e) {
      if (ctx.is_local(e)) ctx.schedule(e, e, SimTime(7 * e), "tick");
    }
  }
  void handle(const Event& ev, Context& ctx) override {
    const EntityId me = ev.target;
    if (ev.handler == "tick") {
      Payload p;
      p.set("count", seen[me]);
      ctx.schedule(me, (me + 1) % n, ctx.now() + delay, "msg", p);
      if (ctx.now() + period < stop) ctx.schedule(me, me, ctx.now() + period, "tick");
    } else {
      seen[me] = seen[me] * 31 + ev.payload.integer("count") + 1;
    }
  }
};

RunSpec ring_spec(std::size_t workers, std::size_t n = 8) {
  RunSpec s;
  s.workers = workers;
  for (std::size_t e = 0; e < n; ++e) s.owner.push_back(static_cast<WorkerId>(e * workers / n));
  s.lookahead = workers == 1 ? SimTime::ms(10) : SimTime(500);
  s.end_time = SimTime::ms(10);
  s.record_trace = true;
  s.make_model = [n](WorkerId) { return std::make_unique<Ring>(n, SimTime(1000), SimTime(500), SimTime(200000)); };
  return s;
}

}  // namespace

TEST(LocalMin, TakesSmallerOfQueueAndOutq) {
  EXPECT_EQ(compute_local_min(SimTime(7), SimTime(5)), SimTime(5));
  EXPECT_EQ(compute_local_min(SimTime::infinity(), SimTime::infinity()), SimTime::infinity());
  EXPECT_EQ(compute_local_min(SimTime(3), SimTime::infinity()), SimTime(3));
}

TEST(Exchange, DeliversPerDestinationAndGlobalMin) {
  InHostHub hub(3);
  std::vector<ExchangeResult> got(3);
  std::vector<std::thread> th;
  for (WorkerId w = 0; w < 3; ++w) {
    th.emplace_back([&, w] {
      InHostTransport t(hub, w);
      std::vector<std::string> out(3);
      if (w == 0) {
        for (int i = 0; i < 3; ++i) out[1] += "a";
        for (int i = 0; i < 2; ++i) out[2] += "b";
      }
      got[w] = t.exchange(out, SimTime(10 + w));
    });
  }
  for (auto& x : th) x.join();
  EXPECT_EQ(got[1].incoming[0], "aaa");
  EXPECT_EQ(got[2].incoming[0], "bb");
  EXPECT_TRUE(got[0].incoming[1].empty());
  for (const auto& g : got) EXPECT_EQ(*std::min_element(g.mins.begin(), g.mins.end()), SimTime(10));
}

TEST(Exchange, SocketMatchesInHost) {
  const std::size_t n = 3;
  std::vector<std::uint16_t> ports(n, 0);
  std::barrier<> startup(n);
  std::vector<std::vector<ExchangeResult>> got(n);
  std::vector<std::thread> th;
  for (WorkerId w = 0; w < n; ++w) {
    th.emplace_back([&, w] {
      SocketTransport t(w, n, ports, startup);
      for (int round = 0; round < 3; ++round) {
        std::vector<std::string> out(n);
        // Large enough to overflow socket buffers when sent before reading.
        for (WorkerId d = 0; d < n; ++d) out[d] = std::string(300000 * (round + 1), char('a' + w));
        got[w].push_back(t.exchange(out, SimTime(100 * round + w)));
      }
      t.barrier();
    });
  }
  for (auto& x : th) x.join();
  for (WorkerId w = 0; w < n; ++w) {
    for (int round = 0; round < 3; ++round) {
      const auto& r = got[w][round];
      for (WorkerId s = 0; s < n; ++s) {
        if (s == w) continue;
        EXPECT_EQ(r.incoming[s], std::string(300000 * (round + 1), char('a' + s)));
        EXPECT_EQ(r.mins[s], SimTime(100 * round + s));
      }
    }
  }
}

TEST(Lookahead, BaselineIsShortestCrossingDelay) {
  std::vector<LinkTiming> links{{0, 1, 2, SimTime::us(2) + SimTime(500000), SimTime::us(300)}};
  std::vector<WorkerId> owner{0, 1, 1};
  const Lookahead la = compute_lookahead(LookaheadMode::kBaseline, links, owner, 2, SimTime::ms(100));
  EXPECT_EQ(la.window, SimTime(2500000));
  EXPECT_TRUE(la.lagged.empty());
}

TEST(Lookahead, HalfClassicalLagsCutBsms) {
  std::vector<LinkTiming> links{{0, 1, 4, SimTime(2500000), SimTime::us(300)},
                                {1, 2, 5, SimTime(2500000), SimTime::us(300)},
                                {2, 3, 6, SimTime(2500000), SimTime::us(300)}};
  std::vector<WorkerId> owner{0, 0, 1, 1, 0, 1, 1};
  const Lookahead la = compute_lookahead(LookaheadMode::kHalfClassical, links, owner, 2, SimTime::ms(100));
  EXPECT_EQ(la.window, SimTime(150000000));
  EXPECT_EQ(la.lag, SimTime(150000000));
  EXPECT_EQ(la.lagged, std::vector<EntityId>{5});
}

TEST(Lookahead, HalfClassicalNeedsSlowClassicalLinks) {
  std::vector<LinkTiming> links{{0, 1, 2, SimTime::us(200), SimTime::us(300)}};
  std::vector<WorkerId> owner{0, 1, 1};
  EXPECT_EQ(code_of([&] { compute_lookahead(LookaheadMode::kHalfClassical, links, owner, 2, SimTime::ms(1)); }),
            ErrorCode::kModeInapplicable);
}

TEST(Lookahead, SingleWorkerUsesWholeRun) {
  std::vector<LinkTiming> links{{0, 1, 2, SimTime(2500000), SimTime::us(300)}};
  std::vector<WorkerId> owner{0, 0, 0};
  EXPECT_EQ(compute_lookahead(LookaheadMode::kBaseline, links, owner, 1, SimTime::ms(100)).window, SimTime::ms(100));
}

TEST(Engine, TraceIndependentOfWorkerCount) {
  const RunResult one = run(ring_spec(1));
  ASSERT_GT(one.trace.size(), 1000u);
  for (std::size_t p : {2u, 4u, 8u}) {
    const RunResult many = run(ring_spec(p));
    EXPECT_EQ(many.trace, one.trace) << "p=" << p;
    EXPECT_GT(many.windows(), 1u);
  }
}

TEST(Engine, SingleWorkerMatchesPlainTimeline) {
  // Same model driven by a bare timeline with no windows at all.
  Ring model(8, SimTime(1000), SimTime(500), SimTime(200000));
  Timeline tl;
  std::vector<TraceRecord> trace;
  auto sched = [&](EntityId src, EntityId dst, SimTime at, std::string h, Payload p) {
    Event e;
    e.key = SortKey{at, src, tl.next_seq(src)};
    e.target = dst;
    e.handler = std::move(h);
    e.payload = std::move(p);
    tl.schedule(std::move(e));
  };
  tl.set_dispatch([&](const Event& e) {
    trace.push_back(TraceRecord{e.key, e.target, e.handler, digest(e)});
    if (e.handler == "tick") {
      Payload p;
      p.set("count", model.seen[e.target]);
      sched(e.target, (e.target + 1) % 8, tl.now() + SimTime(500), "msg", p);
      if (tl.now() + SimTime(1000) < SimTime(200000)) sched(e.target, e.target, tl.now() + SimTime(1000), "tick", {});
    } else {
      model.seen[e.target] = model.seen[e.target] * 31 + e.payload.integer("count") + 1;
    }
  });
  for (EntityId e = 0; e < 8; ++e) sched(e, e, SimTime(7 * e), "tick", {});
  tl.run_until(SimTime::ms(10));
  const RunResult one = run(ring_spec(1));
  EXPECT_EQ(one.trace, trace);
  EXPECT_EQ(one.windows(), 1u);
}

TEST(Engine, DuplicationMultipliesBytesNotEvents) {
  RunSpec a = ring_spec(2);
  RunSpec b = ring_spec(2);
  b.duplication = 8;
  const RunResult ra = run(a);
  const RunResult rb = run(b);
  EXPECT_EQ(ra.trace, rb.trace);
  for (std::size_t w = 0; w < 2; ++w) {
    EXPECT_EQ(rb.workers[w].bytes_sent, 9 * ra.workers[w].bytes_sent);
    EXPECT_EQ(rb.workers[w].events_received, ra.workers[w].events_received);
  }
}

TEST(Engine, SocketTransportMatchesInHost) {
  RunSpec s = ring_spec(4);
  s.transport = TransportKind::kSocket;
  EXPECT_EQ(run(s).trace, run(ring_spec(4)).trace);
}

TEST(Engine, WindowCountFollowsLookahead) {
  RunSpec narrow = ring_spec(2);
  RunSpec wide = ring_spec(2);
  wide.lookahead = SimTime(500);
  narrow.lookahead = SimTime(3);
  const RunResult rn = run(narrow);
  const RunResult rw = run(wide);
  EXPECT_EQ(rn.trace, rw.trace);
  EXPECT_GT(rn.windows(), 3 * rw.windows());
}

TEST(Engine, TooLargeLookaheadIsCaught) {
  RunSpec s = ring_spec(2);
  s.lookahead = SimTime(5000);
  EXPECT_EQ(code_of([&] { run(s); }), ErrorCode::kCausalityViolation);
}

TEST(Engine, HandlerErrorStopsAllWorkers) {
  struct Boom : Model {
    void start(Context& ctx) override {
      if (ctx.worker() == 1) ctx.schedule(1, 1, SimTime(10), "boom");
      ctx.schedule(ctx.worker(), ctx.worker(), SimTime(5), "fine");
    }
    void handle(const Event& e, Context& ctx) override {
      if (e.handler == "boom") fail(ErrorCode::kHandlerFailure, "boom");
      ctx.schedule(e.target, e.target, ctx.now() + SimTime(3), "fine");
    }
  };
  RunSpec s;
  s.workers = 3;
  s.owner = {0, 1, 2};
  s.lookahead = SimTime(4);
  s.end_time = SimTime(1000000);
  s.make_model = [](WorkerId) { return std::make_unique<Boom>(); };
  EXPECT_EQ(code_of([&] { run(s); }), ErrorCode::kHandlerFailure);
}

TEST(Engine, AuditRunsOncePerWindow) {
  RunSpec s = ring_spec(3);
  std::uint64_t calls = 0;
  s.audit = [&](std::uint64_t, std::span<qsm::LocalQsm* const> q, std::span<Model* const>) {
    ++calls;
    EXPECT_EQ(q.size(), 3u);
  };
  const RunResult r = run(s);
  EXPECT_EQ(calls, r.windows());
}

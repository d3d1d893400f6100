#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "qpdes/event/rng.hpp"
#include "qpdes/event/timeline.hpp"
#include "qpdes/event/wire.hpp"

using namespace qpdes;

namespace {

Event make(SimTime t, EntityId source, std::uint64_t seq, EntityId target, std::string handler) {
  Event e;
  e.key = SortKey{t, source, seq};
  e.target = target;
  e.handler = std::move(handler);
  return e;
}

}  // namespace

TEST(SimTime, InfinityAbsorbsAddition) {
  EXPECT_TRUE((SimTime::infinity() + SimTime::ms(1)).is_infinite());
  EXPECT_TRUE((SimTime::ms(1) + SimTime::infinity()).is_infinite());
}

TEST(SimTime, OverflowThrows) {
  const SimTime big(std::numeric_limits<std::int64_t>::max() - 10);
  try {
    (void)(big + SimTime::ps(100));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTimeOverflow);
  }
  EXPECT_THROW((void)(SimTime::ps(1) - SimTime::ps(2)), Error);
}

TEST(SimTime, FromSecondsRounds) {
  EXPECT_EQ(SimTime::from_seconds(0.3e-3).ticks(), 300'000'000);
  EXPECT_EQ(SimTime::from_seconds(1e-3 / 2e5 * 1e3).ticks(), 5'000'000);
  EXPECT_EQ(SimTime::from_seconds(12.5e-9).ticks(), 12'500);
}

TEST(QubitKey, RoundTripsThroughText) {
  KeyFactory f(7, 42);
  for (int i = 0; i < 100; ++i) {
    const QubitKey k = f.next();
    const auto parsed = QubitKey::parse(k.str());
    ASSERT_TRUE(parsed.has_value());
    EXPECT_EQ(*parsed, k);
    EXPECT_EQ(k.str().size(), 36u);
  }
  EXPECT_FALSE(QubitKey::parse("not-a-key").has_value());
}

TEST(QubitKey, FactoriesNeverCollide) {
  std::set<QubitKey> seen;
  for (std::uint32_t entity = 0; entity < 20; ++entity) {
    KeyFactory f(3, entity);
    for (int i = 0; i < 200; ++i) EXPECT_TRUE(seen.insert(f.next()).second);
  }
}

TEST(Timeline, ExecutesInTimeOrder) {
  Timeline tl;
  std::vector<std::string> order;
  tl.set_dispatch([&](const Event& e) { order.push_back(e.handler); });
  tl.schedule(make(SimTime::ps(5), 0, 0, 0, "late"));
  tl.schedule(make(SimTime::ps(3), 0, 1, 0, "early"));
  tl.run_until(SimTime::infinity());
  EXPECT_EQ(order, (std::vector<std::string>{"early", "late"}));
}

TEST(Timeline, TiesBreakBySourceEntity) {
  Timeline tl;
  std::vector<std::string> order;
  tl.set_dispatch([&](const Event& e) { order.push_back(e.handler); });
  tl.schedule(make(SimTime::ps(5), 2, 0, 0, "from-b"));
  tl.schedule(make(SimTime::ps(5), 1, 0, 0, "from-a"));
  tl.schedule(make(SimTime::ps(5), 1, 1, 0, "from-a-second"));
  tl.run_until(SimTime::infinity());
  EXPECT_EQ(order, (std::vector<std::string>{"from-a", "from-a-second", "from-b"}));
}

TEST(Timeline, RejectsPastEvents) {
  Timeline tl;
  tl.set_dispatch([](const Event&) {});
  tl.run_until(SimTime::ps(10));
  try {
    tl.schedule(make(SimTime::ps(9), 0, 0, 0, "x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchedulingInPast);
  }
  EXPECT_NO_THROW(tl.schedule(make(SimTime::ps(10), 0, 0, 0, "x")));
}

TEST(Timeline, RunUntilIsExclusiveAndAdvancesClock) {
  Timeline tl;
  int runs = 0;
  tl.set_dispatch([&](const Event&) { ++runs; });
  for (std::int64_t t : {1, 2, 7}) tl.schedule(make(SimTime::ps(t), 0, static_cast<std::uint64_t>(t), 0, "x"));
  EXPECT_EQ(tl.run_until(SimTime::ps(5)), 2u);
  EXPECT_EQ(runs, 2);
  EXPECT_EQ(tl.local_time(), SimTime::ps(5));
  EXPECT_EQ(tl.min_time(), SimTime::ps(7));
  EXPECT_EQ(tl.run_until(SimTime::ps(7)), 0u);
  EXPECT_EQ(tl.run_until(SimTime::ps(8)), 1u);
  EXPECT_TRUE(tl.min_time().is_infinite());
}

TEST(Timeline, HandlersCanScheduleWithinTheSameRun) {
  Timeline tl;
  std::vector<std::int64_t> times;
  tl.set_dispatch([&](const Event& e) {
    times.push_back(e.time().ticks());
    if (e.handler == "first") tl.schedule(make(e.time() + SimTime::ps(1), 0, tl.next_seq(0), 0, "second"));
  });
  tl.schedule(make(SimTime::ps(3), 0, tl.next_seq(0), 0, "first"));
  EXPECT_EQ(tl.run_until(SimTime::ps(100)), 2u);
  EXPECT_EQ(times, (std::vector<std::int64_t>{3, 4}));
}

TEST(Timeline, HandlerErrorsAreWrapped) {
  Timeline tl;
  tl.set_dispatch([](const Event&) { throw std::runtime_error("boom"); });
  tl.schedule(make(SimTime::ps(1), 0, 0, 0, "x"));
  try {
    tl.run_until(SimTime::ps(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kHandlerFailure);
  }
}

TEST(Timeline, LaggedEntitiesRunOnShiftedClock) {
  Timeline tl;
  tl.set_lag(SimTime::ps(10));
  tl.mark_lagged(1);
  std::vector<std::string> order;
  tl.set_dispatch([&](const Event& e) { order.push_back(e.handler); });
  tl.schedule(make(SimTime::ps(5), 0, 0, 1, "lagged-at-5"));
  tl.schedule(make(SimTime::ps(12), 0, 1, 0, "plain-at-12"));
  EXPECT_EQ(tl.min_time(), SimTime::ps(12));
  EXPECT_EQ(tl.run_until(SimTime::ps(15)), 1u);
  EXPECT_EQ(order, (std::vector<std::string>{"plain-at-12"}));
  EXPECT_EQ(tl.run_until(SimTime::ps(16)), 1u);
  EXPECT_EQ(order.back(), "lagged-at-5");
}

TEST(Rng, SameSeedSameSequence) {
  RngRegistry a(42), b(42);
  a.add("router/1");
  b.add("router/1");
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_random("router/1"), b.next_random("router/1"));
}

TEST(Rng, StreamsAreIsolated) {
  RngRegistry a(42), b(42);
  a.add("router/1");
  a.add("router/2");
  b.add("router/1");
  b.add("router/2");
  for (int i = 0; i < 500; ++i) (void)a.next_random("router/2");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_random("router/1"), b.next_random("router/1"));
  EXPECT_NE(derive_stream_seed(42, "router/1"), derive_stream_seed(42, "router/2"));
  EXPECT_NE(derive_stream_seed(42, "router/1"), derive_stream_seed(43, "router/1"));
}

TEST(Rng, UnknownStreamThrows) {
  RngRegistry r(1);
  try {
    (void)r.next_random("nobody");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownEntity);
  }
}

TEST(Rng, UniformMeanAndRange) {
  RngRegistry r(9);
  r.add("bsm/0");
  double sum = 0.0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const double x = r.next_random("bsm/0");
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    sum += x;
  }
  const double mean = sum / kDraws;
  EXPECT_GE(mean, 0.49);
  EXPECT_LE(mean, 0.51);
  EXPECT_EQ(r.stream("bsm/0").draws(), static_cast<std::uint64_t>(kDraws));
}

TEST(Wire, RoundTripsRandomEvents) {
  std::mt19937_64 gen(5);
  std::string buffer;
  std::vector<Event> sent;
  for (int i = 0; i < 300; ++i) {
    Event e = make(SimTime::ps(static_cast<std::int64_t>(gen() >> 8)), static_cast<EntityId>(gen() % 1000), gen(),
                   static_cast<EntityId>(gen() % 1000), "h" + std::to_string(gen() % 7));
    e.dest_worker = static_cast<WorkerId>(gen() % 16);
    const int n = static_cast<int>(gen() % 5);
    for (int f = 0; f < n; ++f) {
      const std::string name = "f" + std::to_string(f);
      switch (gen() % 5) {
        case 0: e.payload.set(name, static_cast<std::int64_t>(gen())); break;
        case 1: e.payload.set(name, std::ldexp(static_cast<double>(gen() >> 11), -30)); break;
        case 2: e.payload.set(name, std::string(gen() % 40, 'z')); break;
        case 3: e.payload.set(name, QubitKey{gen(), gen()}); break;
        default: e.payload.set(name, Amplitudes{{0.5, -0.25}, {std::sqrt(0.5), 1e-300}}); break;
      }
    }
    wire::encode(e, buffer);
    sent.push_back(std::move(e));
  }
  const std::vector<Event> got = wire::decode_all(buffer);
  ASSERT_EQ(got.size(), sent.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i], sent[i]);
    EXPECT_EQ(digest(got[i]), digest(sent[i]));
  }
}

TEST(Wire, TruncatedRecordFails) {
  Event e = make(SimTime::ps(1), 0, 0, 0, "x");
  e.payload.set("a", std::int64_t{1});
  std::string bytes = wire::encode(e);
  bytes.pop_back();
  std::string_view view(bytes);
  try {
    (void)wire::decode(view);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kTransportFailure);
  }
}

TEST(Digest, IgnoresAmplitudesButNotControlFields) {
  Event a = make(SimTime::ps(1), 0, 0, 0, "x");
  Event b = a;
  a.payload.set("state", Amplitudes{{1.0, 0.0}});
  b.payload.set("state", Amplitudes{{0.0, 1.0}});
  EXPECT_EQ(digest(a), digest(b));
  b.payload.set("outcome", std::int64_t{1});
  EXPECT_NE(digest(a), digest(b));
}

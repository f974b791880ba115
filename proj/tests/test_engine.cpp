#include "mmv2v/engine.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <set>
#include <vector>

using namespace mmv2v;

TEST(SimTime, ConversionsAreExact) {
  EXPECT_EQ(SimTime::from_us(125).ns(), 125'000);
  EXPECT_EQ(SimTime::from_seconds(0.000125).ns(), 125'000);
  EXPECT_EQ(SimTime::from_seconds(0.00025).ns(), 250'000);
  // 80000 slots of 125 us land exactly on 10 s.
  EXPECT_EQ((SimTime::from_us(125) * 80'000).ns(), SimTime::from_seconds(10.0).ns());
  EXPECT_THROW(SimTime::from_seconds(std::nan("")), ConfigError);
}

TEST(Simulator, FiresAtRequestedTime) {
  Simulator sim;
  SimTime fired = SimTime::max();
  sim.schedule_seconds(0.000125, [&] { fired = sim.now(); });
  EXPECT_EQ(sim.run_until(SimTime::from_ms(1)), 1u);
  EXPECT_EQ(fired.ns(), 125'000);
  EXPECT_EQ(sim.now(), SimTime::from_ms(1));
}

TEST(Simulator, TiesFireInInsertionOrder) {
  Simulator sim;
  std::vector<int> order;
  for (int i = 0; i < 10; ++i)
    sim.schedule(SimTime::from_us(5), [&order, i] { order.push_back(i); });
  sim.run_until(SimTime::from_us(5));
  EXPECT_EQ(order, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST(Simulator, RejectsInvalidDelays) {
  Simulator sim;
  EXPECT_THROW(sim.schedule_seconds(-1.0, [] {}), ConfigError);
  EXPECT_THROW(sim.schedule_seconds(std::numeric_limits<double>::infinity(), [] {}), ConfigError);
  EXPECT_THROW(sim.schedule_seconds(std::nan(""), [] {}), ConfigError);
  EXPECT_THROW(sim.schedule(SimTime::from_ns(-1), [] {}), ConfigError);
  sim.run_until(SimTime::from_ms(2));
  EXPECT_THROW(sim.schedule_at(SimTime::from_ms(1), [] {}), ConfigError);
  sim.finish();
  EXPECT_THROW(sim.schedule(SimTime(), [] {}), ConfigError);
}

TEST(Simulator, RunUntilCounts) {
  Simulator empty;
  EXPECT_EQ(empty.run_until(SimTime::from_seconds(10)), 0u);

  Simulator sim;
  for (int s : {1, 2, 3})
    sim.schedule_seconds(s, [] {});
  EXPECT_EQ(sim.run_until(SimTime::from_seconds(2.5)), 2u);
  EXPECT_EQ(sim.run_until(SimTime::from_seconds(5)), 1u);
}

TEST(Simulator, CancelledEventsNeverRun) {
  Simulator sim;
  int ran = 0;
  auto a = sim.schedule(SimTime::from_us(1), [&] { ++ran; });
  auto b = sim.schedule(SimTime::from_us(2), [&] { ++ran; });
  EXPECT_TRUE(sim.is_pending(a));
  sim.cancel(a);
  EXPECT_FALSE(sim.is_pending(a));
  sim.cancel(a);
  sim.cancel(EventHandle{});
  EXPECT_EQ(sim.run_until(SimTime::from_us(10)), 1u);
  EXPECT_EQ(ran, 1);
  sim.cancel(b); // already fired
  EXPECT_EQ(sim.pending_count(), 0u);
}

// Random workload where handlers schedule and cancel further events; the
// trace (time, sequence) must be identical across executions and time never
// decreases.
static std::uint64_t workload_hash(std::uint64_t seed) {
  Simulator sim;
  RngFactory rng(seed);
  RngStream& r = rng.stream("workload");
  std::uint64_t h = 1469598103934665603ULL;
  SimTime last;
  bool monotone = true;
  sim.set_trace([&](SimTime t, std::uint64_t seq) {
    monotone = monotone && t >= last;
    last = t;
    h = (h ^ static_cast<std::uint64_t>(t.ns())) * 1099511628211ULL;
    h = (h ^ seq) * 1099511628211ULL;
  });
  std::vector<EventHandle> handles;
  std::function<void()> spawn = [&] {
    const int n = static_cast<int>(r.uniform() * 3);
    for (int i = 0; i < n; ++i)
      handles.push_back(sim.schedule(SimTime::from_ns(static_cast<std::int64_t>(r.uniform() * 1e6)), spawn));
    if (!handles.empty() && r.bernoulli(0.3))
      sim.cancel(handles[static_cast<std::size_t>(r.uniform() * static_cast<double>(handles.size()))]);
  };
  for (int i = 0; i < 20; ++i)
    sim.schedule(SimTime::from_ns(i * 1000), spawn);
  sim.run_until(SimTime::from_ms(20));
  EXPECT_TRUE(monotone);
  return h;
}

TEST(Simulator, TraceIsDeterministic) {
  EXPECT_EQ(workload_hash(7), workload_hash(7));
  EXPECT_NE(workload_hash(7), workload_hash(8));
}

TEST(Rng, SameSeedAndLabelReproduce) {
  RngStream a(42, "fading/0->1");
  RngStream b(42, "fading/0->1");
  for (int i = 0; i < 1000; ++i)
    ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, FactoryReturnsSameStreamObject) {
  RngFactory f(3);
  RngStream& a = f.stream("x");
  a.uniform();
  EXPECT_EQ(&a, &f.stream("x"));
}

TEST(Rng, NewStreamsDoNotPerturbExistingOnes) {
  RngFactory f1(11);
  RngFactory f2(11);
  f2.stream("unrelated").uniform();
  std::vector<double> x1, x2;
  for (int i = 0; i < 100; ++i) {
    x1.push_back(f1.stream("traffic").uniform());
    x2.push_back(f2.stream("traffic").uniform());
    f2.stream("another").normal();
  }
  EXPECT_EQ(x1, x2);
}

TEST(Rng, DifferentLabelsDifferAcrossSeeds) {
  int equal = 0;
  for (std::uint64_t seed = 0; seed < 10'000; ++seed)
    equal += RngStream(seed, "fading").uniform() == RngStream(seed, "traffic").uniform();
  EXPECT_EQ(equal, 0);
}

TEST(Rng, UniformMean) {
  RngStream r(1, "mean");
  double sum = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double u = r.uniform();
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_GE(sum / 1e6, 0.499);
  EXPECT_LE(sum / 1e6, 0.501);
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
}

TEST(Rng, ExponentialMean) {
  RngStream r(5, "exp");
  double sum = 0.0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i)
    sum += r.exponential(0.1);
  // Standard error of the mean is 0.1 / sqrt(n) ~ 2.2e-4.
  EXPECT_NEAR(sum / n, 0.1, 1.5e-3);
}

#include "mmv2v/stack.hpp"

#include <gtest/gtest.h>

using namespace mmv2v;

TEST(Headers, Sizes) {
  EXPECT_EQ(add_headers(100), 133);
  EXPECT_EQ(add_headers(0), 33);
  HeaderSizes none{0, 0, 0, 0, 0};
  EXPECT_EQ(add_headers(100, none), 100);
  EXPECT_EQ(HeaderSizes{}.sdu_bytes(100), 131);
}

TEST(Traffic, CbrSpacing) {
  RngStream r(1, "traffic/0");
  TrafficPattern p(TrafficSource::cbr(800e3, 100), r);
  for (int k = 0; k < 10'000; ++k)
    ASSERT_EQ(p.next(), SimTime::from_ms(k));
}

TEST(Traffic, RejectsNonPositive) {
  RngStream r(1, "t");
  EXPECT_THROW(TrafficPattern(TrafficSource::cbr(0.0, 100), r), ConfigError);
  EXPECT_THROW(TrafficPattern(TrafficSource::cbr(-5.0, 100), r), ConfigError);
  EXPECT_THROW(TrafficPattern(TrafficSource::cbr(1e6, 0), r), ConfigError);
}

TEST(Traffic, OnOffDutyCycle) {
  // Renewal argument: mean ON 100 ms, mean OFF 100 ms, so half the horizon
  // is ON and the long-run packet rate is half the CBR rate.
  RngStream r(3, "traffic/0");
  const double rate = 10e6;
  TrafficPattern p(TrafficSource::on_off(rate, 100), r);
  const SimTime horizon = SimTime::from_seconds(2000.0); // ~10^4 ON/OFF cycles
  std::uint64_t n = 0;
  SimTime t;
  while ((t = p.next()) < horizon)
    ++n;
  const double offered = static_cast<double>(n) * 800.0 / horizon.seconds();
  EXPECT_NEAR(offered, rate / 2.0, 0.02 * rate / 2.0);
}

TEST(Traffic, OnOffIsCbrInsideOnPeriods) {
  RngStream r(4, "traffic/0");
  TrafficPattern p(TrafficSource::on_off(10e6, 100), r);
  SimTime prev = p.next();
  int gaps = 0;
  for (int i = 0; i < 100'000; ++i) {
    const SimTime t = p.next();
    const std::int64_t d = (t - prev).ns();
    ASSERT_GT(d, 0);
    if (std::llabs(d - 80'000) > 1)
      ++gaps;
    prev = t;
  }
  EXPECT_GT(gaps, 0);
  // 100 ms ON / 80 us spacing: 1250 packets per ON period.
  EXPECT_NEAR(100'000.0 / gaps, 1250.0, 5.0);
}

TEST(RlcTx, WholeSduFitsInMcs0Grant) {
  RlcTxEntity tx;
  ASSERT_TRUE(tx.enqueue({0, 131}));
  const auto pdus = tx.fill(2599);
  ASSERT_EQ(pdus.size(), 1u);
  EXPECT_EQ(pdus[0].size_bytes(), 133);
  ASSERT_EQ(pdus[0].segments.size(), 1u);
  EXPECT_TRUE(pdus[0].segments[0].is_last());
  EXPECT_TRUE(tx.empty());
}

TEST(RlcTx, SegmentsWhenGrantIsSmall) {
  RlcTxEntity tx;
  tx.enqueue({0, 131});
  const auto first = tx.fill(80 * 8);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_EQ(first[0].segments[0].length, 78);
  EXPECT_EQ(first[0].size_bytes(), 80);
  EXPECT_FALSE(first[0].segments[0].is_last());
  EXPECT_EQ(tx.buffered_bytes(), 53u);
  const auto rest = tx.fill(2599);
  ASSERT_EQ(rest.size(), 1u);
  EXPECT_EQ(rest[0].segments[0].offset, 78);
  EXPECT_EQ(rest[0].segments[0].length, 53);
  EXPECT_TRUE(rest[0].segments[0].is_last());
  EXPECT_EQ(rest[0].sn, first[0].sn + 1);
}

TEST(RlcTx, EmptyAndTooSmall) {
  RlcTxEntity tx;
  EXPECT_TRUE(tx.fill(10'000).empty());
  tx.enqueue({0, 131});
  EXPECT_TRUE(tx.fill(16).empty()); // 2 bytes: header only
  EXPECT_TRUE(tx.fill(0).empty());
  EXPECT_EQ(tx.next_sn(), 0u);
  EXPECT_EQ(tx.fill(24).size(), 1u);
}

TEST(RlcTx, ConcatenatesWithPerSegmentHeader) {
  RlcTxEntity tx;
  for (PacketId i = 0; i < 5; ++i)
    tx.enqueue({i, 131});
  const auto pdus = tx.fill(2227); // 278 bytes
  ASSERT_EQ(pdus.size(), 1u);
  const RlcPdu& p = pdus[0];
  ASSERT_EQ(p.segments.size(), 3u);
  EXPECT_EQ(p.header_bytes, 2 + 2);
  EXPECT_EQ(p.segments[0].length, 131);
  EXPECT_EQ(p.segments[1].length, 131);
  EXPECT_EQ(p.segments[2].length, 278 - 4 - 262);
  EXPECT_EQ(p.size_bytes(), 278);
}

TEST(RlcTx, FillNeverExceedsGrantAndConservesBytes) {
  RngStream r(2, "fill");
  RlcTxEntity tx(1 << 30);
  std::size_t in = 0;
  std::size_t out = 0;
  for (PacketId i = 0; i < 5000; ++i) {
    const int b = 1 + static_cast<int>(r.uniform() * 400);
    tx.enqueue({i, b});
    in += static_cast<std::size_t>(b);
    if (r.bernoulli(0.7)) {
      const std::int64_t cap = static_cast<std::int64_t>(r.uniform() * 4000);
      for (const RlcPdu& p : tx.fill(cap)) {
        ASSERT_LE(p.size_bytes() * 8, cap);
        for (const auto& s : p.segments)
          out += static_cast<std::size_t>(s.length);
      }
    }
  }
  EXPECT_EQ(in, out + tx.buffered_bytes());
}

TEST(RlcTx, TailDropWholeSdus) {
  RlcTxEntity tx(300);
  EXPECT_TRUE(tx.enqueue({0, 131}));
  EXPECT_TRUE(tx.enqueue({1, 131}));
  EXPECT_FALSE(tx.enqueue({2, 131}));
  EXPECT_EQ(tx.buffered_bytes(), 262u);
  EXPECT_TRUE(tx.enqueue({3, 38}));
}

namespace {

RlcPdu whole(std::uint32_t sn, PacketId id, int bytes = 131) {
  RlcPdu p;
  p.sn = sn;
  p.header_bytes = 2;
  p.segments.push_back({id, 0, bytes, bytes});
  return p;
}

std::vector<PacketId> ids(const std::vector<DeliveredSdu>& v) {
  std::vector<PacketId> out;
  for (const auto& d : v)
    out.push_back(d.packet_id);
  return out;
}

} // namespace

TEST(RlcRx, InOrderDeliversImmediately) {
  RlcRxEntity rx(SimTime::from_ms(10));
  for (std::uint32_t s = 0; s < 3; ++s) {
    const auto d = rx.receive(whole(s, s), SimTime::from_ms(s));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].at, SimTime::from_ms(s));
    EXPECT_FALSE(rx.timer_deadline());
  }
}

TEST(RlcRx, GapFilledBeforeExpiry) {
  RlcRxEntity rx(SimTime::from_ms(10));
  EXPECT_EQ(ids(rx.receive(whole(0, 0), SimTime::from_ms(0))), (std::vector<PacketId>{0}));
  EXPECT_TRUE(rx.receive(whole(2, 2), SimTime::from_ms(1)).empty());
  ASSERT_TRUE(rx.timer_deadline());
  const auto d = rx.receive(whole(1, 1), SimTime::from_ms(3));
  EXPECT_EQ(ids(d), (std::vector<PacketId>{1, 2}));
  EXPECT_EQ(d[1].at, SimTime::from_ms(3));
  EXPECT_FALSE(rx.timer_deadline());
}

TEST(RlcRx, MissingSnReleasedAtExpiry) {
  RlcRxEntity rx(SimTime::from_ms(10));
  rx.receive(whole(0, 0), SimTime::from_ms(0));
  rx.receive(whole(2, 2), SimTime::from_ms(1));
  ASSERT_EQ(rx.timer_deadline(), SimTime::from_ms(11));
  const auto d = rx.expire(SimTime::from_ms(11));
  EXPECT_EQ(ids(d), (std::vector<PacketId>{2}));
  EXPECT_EQ(d[0].at, SimTime::from_ms(11));
  EXPECT_FALSE(rx.timer_deadline());
  // A late copy of SN 1 is now behind the window edge.
  EXPECT_TRUE(rx.receive(whole(1, 1), SimTime::from_ms(12)).empty());
  EXPECT_EQ(rx.anomalies(), 1u);
}

TEST(RlcRx, TwoSeparatedGapsChainTimers) {
  RlcRxEntity rx(SimTime::from_ms(10));
  rx.receive(whole(0, 0), SimTime::from_ms(0));
  rx.receive(whole(2, 2), SimTime::from_ms(1));
  rx.receive(whole(4, 4), SimTime::from_ms(2));
  const auto first = rx.expire(SimTime::from_ms(11));
  EXPECT_EQ(ids(first), (std::vector<PacketId>{2}));
  ASSERT_EQ(rx.timer_deadline(), SimTime::from_ms(21));
  const auto second = rx.expire(SimTime::from_ms(21));
  EXPECT_EQ(ids(second), (std::vector<PacketId>{4}));
  EXPECT_EQ((second[0].at - SimTime::from_ms(2)).ns(), SimTime::from_ms(19).ns());
  EXPECT_LE(second[0].at - SimTime::from_ms(2), SimTime::from_ms(20));
}

TEST(RlcRx, SduTouchingGapIsDiscarded) {
  RlcRxEntity rx(SimTime::from_ms(5));
  RlcPdu a; // SDU 0 whole + first part of SDU 1
  a.sn = 0;
  a.segments = {{0, 0, 100, 100}, {1, 0, 50, 120}};
  RlcPdu c; // tail of SDU 2, SDU 3 whole
  c.sn = 2;
  c.segments = {{2, 60, 60, 120}, {3, 0, 80, 80}};
  EXPECT_EQ(ids(rx.receive(a, SimTime::from_ms(0))), (std::vector<PacketId>{0}));
  EXPECT_TRUE(rx.receive(c, SimTime::from_ms(1)).empty());
  const auto d = rx.expire(SimTime::from_ms(6));
  EXPECT_EQ(ids(d), (std::vector<PacketId>{3}));
}

TEST(RlcRx, DuplicateIsAnomaly) {
  RlcRxEntity rx(SimTime::from_ms(5));
  rx.receive(whole(0, 0), SimTime());
  rx.receive(whole(2, 2), SimTime());
  EXPECT_TRUE(rx.receive(whole(2, 2), SimTime()).empty());
  EXPECT_EQ(rx.anomalies(), 1u);
}

TEST(RlcRx, ZeroTimerReleasesAtOnce) {
  RlcRxEntity rx{SimTime()};
  rx.receive(whole(0, 0), SimTime());
  rx.receive(whole(2, 2), SimTime::from_ms(1));
  ASSERT_EQ(rx.timer_deadline(), SimTime::from_ms(1));
  EXPECT_EQ(ids(rx.expire(SimTime::from_ms(1))), (std::vector<PacketId>{2}));
}

TEST(RlcRx, SequenceNumbersWrap) {
  RlcRxEntity rx(SimTime::from_ms(10));
  PacketId id = 0;
  std::vector<PacketId> got;
  for (int i = 0; i < 5000; ++i) {
    if (i % 7 == 3) {
      ++id;
      continue; // lost
    }
    const SimTime now = SimTime::from_ms(i);
    if (rx.timer_deadline() && *rx.timer_deadline() <= now)
      for (auto& d : rx.expire(*rx.timer_deadline()))
        got.push_back(d.packet_id);
    for (auto& d : rx.receive(whole(static_cast<std::uint32_t>(i % 1024), id), now))
      got.push_back(d.packet_id);
    ++id;
  }
  EXPECT_EQ(rx.anomalies(), 0u);
  EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
  EXPECT_EQ(std::adjacent_find(got.begin(), got.end()), got.end());
  EXPECT_GT(got.size(), 4000u);
}

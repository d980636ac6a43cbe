#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "wiplus/core/error.hpp"
#include "wiplus/core/window.hpp"

using namespace wiplus;

namespace {

RegisterSnapshot snap(std::uint64_t t, std::uint32_t tx, std::uint32_t rx, std::uint32_t ed, std::uint32_t idle,
                      std::uint64_t acks = 0) {
  return {t, tx, rx, ed, idle, acks};
}

// Reference percentage using exact rational arithmetic on the unwrapped delta.
int oracle_pct(std::uint64_t unwrapped, std::uint64_t elapsed) {
  const long double exact = 100.0L * static_cast<long double>(unwrapped) / static_cast<long double>(elapsed);
  return static_cast<int>(std::floor(exact + 0.5L));
}

}  // namespace

TEST(CounterDelta, WrapsModulo32Bits) {
  EXPECT_EQ(counter_delta(10u, 30u), 20u);
  EXPECT_EQ(counter_delta(0xFFFFFFF0u, 0x10u), 0x20u);
  EXPECT_EQ(counter_delta(0xFFFFFFFFu, 0u), 1u);
  static_assert(counter_delta(5u, 5u) == 0u);
}

TEST(Window, ConvertsSingleInterval) {
  const std::vector<RegisterSnapshot> s = {snap(0, 0, 0, 0, 0), snap(20000, 10000, 2000, 6000, 2000, 3)};
  const auto w = snapshots_to_window(s);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w.samples[0], (MacSample{50, 10, 30, 10, 3}));
  EXPECT_DOUBLE_EQ(w.window_start_s, 0.0);
}

TEST(Window, HandlesCounterWrapInsideInterval) {
  const std::uint32_t near = 0xFFFFFFFFu - 4999u;
  const std::vector<RegisterSnapshot> s = {snap(100, near, 0, 0, 0), snap(20100, near + 20000u, 0, 0, 0)};
  const auto w = snapshots_to_window(s);
  EXPECT_EQ(w.samples[0].s_tx, 100);
  EXPECT_EQ(w.samples[0].s_idle, 0);
}

TEST(Window, NormalisesToActualIntervalUnderJitter) {
  // 25000 ticks elapsed instead of the nominal 20000.
  const std::vector<RegisterSnapshot> s = {snap(0, 0, 0, 0, 0), snap(25000, 25000, 0, 0, 0)};
  EXPECT_EQ(snapshots_to_window(s).samples[0].s_tx, 100);
}

TEST(Window, RejectsBadInput) {
  const std::vector<RegisterSnapshot> one = {snap(0, 0, 0, 0, 0)};
  EXPECT_THROW(snapshots_to_window(one), Error);
  const std::vector<RegisterSnapshot> backwards = {snap(10, 0, 0, 0, 0), snap(10, 0, 0, 0, 0)};
  try {
    snapshots_to_window(backwards);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonMonotonicTimestamps);
  }
  const std::vector<RegisterSnapshot> gap = {snap(0, 0, 0, 0, 0), snap((1ULL << 32) + 1, 0, 0, 0, 0)};
  try {
    snapshots_to_window(gap);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrapAmbiguity);
  }
  const std::vector<RegisterSnapshot> acks = {snap(0, 0, 0, 0, 0, 5), snap(20000, 0, 0, 0, 20000, 4)};
  EXPECT_THROW(snapshots_to_window(acks), Error);
}

// Property: random partitions of an interval, arbitrary counter starting points.
TEST(Window, PropertyPercentagesMatchOracleAndSumNear100) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint32_t> any32;
  for (int trial = 0; trial < 5000; ++trial) {
    const std::uint64_t elapsed = 15000 + rng() % 10001;
    std::uint64_t cut[3] = {rng() % (elapsed + 1), rng() % (elapsed + 1), rng() % (elapsed + 1)};
    std::sort(cut, cut + 3);
    const std::uint64_t d[4] = {cut[0], cut[1] - cut[0], cut[2] - cut[1], elapsed - cut[2]};
    std::uint32_t base[4];
    for (auto& b : base) b = any32(rng);
    const std::uint64_t t0 = rng() % (1ULL << 40);
    const std::vector<RegisterSnapshot> s = {
        snap(t0, base[0], base[1], base[2], base[3]),
        snap(t0 + elapsed, base[0] + static_cast<std::uint32_t>(d[0]), base[1] + static_cast<std::uint32_t>(d[1]),
             base[2] + static_cast<std::uint32_t>(d[2]), base[3] + static_cast<std::uint32_t>(d[3]))};
    const auto m = snapshots_to_window(s).samples[0];
    const int got[4] = {m.s_tx, m.s_rx, m.s_other, m.s_idle};
    int sum = 0;
    for (int i = 0; i < 4; ++i) {
      sum += got[i];
      EXPECT_GE(got[i], 0);
      EXPECT_LE(got[i], 100);
      EXPECT_LE(std::abs(got[i] - oracle_pct(d[i], elapsed)), 1);
    }
    EXPECT_GE(sum, 99);
    EXPECT_LE(sum, 101);
  }
}

TEST(Window, WrappedCounterExample) {
  const std::vector<RegisterSnapshot> s = {snap(0, 4294960000u, 0, 0, 0), snap(20000, 5000u, 0, 7704, 0)};
  const auto m = snapshots_to_window(s).samples[0];
  // (5000 + 2^32 - 4294960000) = 12296 ticks of 20000
  EXPECT_EQ(m.s_tx, oracle_pct(12296, 20000));
  EXPECT_EQ(m.s_tx, 61);
}

TEST(Window, ConstantCounterShiftLeavesWindowUnchanged) {
  std::mt19937_64 rng(11);
  std::vector<RegisterSnapshot> s;
  std::uint64_t t = 0;
  std::uint32_t c[4] = {0, 0, 0, 0};
  for (int i = 0; i < 200; ++i) {
    s.push_back({t, c[0], c[1], c[2], c[3], static_cast<std::uint64_t>(i / 3)});
    const std::uint32_t a = static_cast<std::uint32_t>(rng() % 20001);
    const std::uint32_t b = static_cast<std::uint32_t>(rng() % (20001 - a));
    c[0] += a;
    c[1] += b;
    c[2] += (20000 - a - b) / 2;
    c[3] += 20000 - a - b - (20000 - a - b) / 2;
    t += 20000;
  }
  const auto ref = snapshots_to_window(s);
  for (std::uint32_t shift : {1u, 0x7FFFFFFFu, 0xFFFFFFFFu, 0xFFFFB1E0u}) {
    auto shifted = s;
    for (auto& x : shifted) {
      x.tx_ticks += shift;
      x.rx_ticks += shift * 3u;
      x.ed_ticks += shift ^ 0x55u;
      x.idle_ticks -= shift;
    }
    const auto w = snapshots_to_window(shifted);
    EXPECT_EQ(w.samples, ref.samples);
  }
}

#include <gtest/gtest.h>

#include <numeric>

#include "wiplus/core/error.hpp"
#include "wiplus/core/window.hpp"
#include "wiplus/synth/synthesizer.hpp"

using namespace wiplus;
using namespace wiplus::synth;

namespace {

LteuTimeline timeline(double period, double duty, double duration, double puncture_len = 0.0) {
  LteuConfig c;
  c.csat_period_s = period;
  c.duty_cycle = duty;
  if (puncture_len > 0.0) {
    c.puncture_period_s = 0.010;
    c.puncture_len_s = puncture_len;
  }
  Rng rng(3);
  return build_lteu_timeline(c, duration, rng);
}

SynthScenario scenario(Regime r, std::uint64_t seed = 1) {
  SynthScenario s;
  s.regime = r;
  s.rng_seed = seed;
  return s;
}

struct Totals {
  std::uint64_t tx = 0, rx = 0, ed = 0, idle = 0, acks = 0;
};

Totals totals(const std::vector<RegisterSnapshot>& s) {
  Totals t;
  for (std::size_t i = 1; i < s.size(); ++i) {
    t.tx += counter_delta(s[i - 1].tx_ticks, s[i].tx_ticks);
    t.rx += counter_delta(s[i - 1].rx_ticks, s[i].rx_ticks);
    t.ed += counter_delta(s[i - 1].ed_ticks, s[i].ed_ticks);
    t.idle += counter_delta(s[i - 1].idle_ticks, s[i].idle_ticks);
  }
  t.acks = s.back().ack_fail_total - s.front().ack_fail_total;
  return t;
}

double mean_other(const SampleWindow& w) {
  double sum = 0.0;
  for (const auto& m : w.samples) sum += m.s_other;
  return sum / static_cast<double>(w.size());
}

bool inside_on(const LteuTimeline& tl, double t, double slack) {
  for (const auto& iv : tl.on_intervals)
    if (t >= iv.start_s - slack && t <= iv.end_s + slack) return true;
  return false;
}

}  // namespace

TEST(Synth, ConservationHoldsExactly) {
  const auto tl = timeline(0.080, 0.33, 2.0);
  for (Regime r : {Regime::Strong, Regime::Medium, Regime::Weak}) {
    const auto out = synthesize_trace(scenario(r), tl);
    ASSERT_EQ(out.snapshots.size(), 4001u);
    for (std::size_t i = 1; i < out.snapshots.size(); ++i) {
      const auto& a = out.snapshots[i - 1];
      const auto& b = out.snapshots[i];
      const std::uint64_t sum = std::uint64_t{counter_delta(a.tx_ticks, b.tx_ticks)} +
                                counter_delta(a.rx_ticks, b.rx_ticks) + counter_delta(a.ed_ticks, b.ed_ticks) +
                                counter_delta(a.idle_ticks, b.idle_ticks);
      ASSERT_EQ(sum, b.timestamp_ticks - a.timestamp_ticks);
    }
  }
}

TEST(Synth, DeterministicForSeed) {
  const auto tl = timeline(0.080, 0.33, 1.0);
  auto sc = scenario(Regime::Medium, 42);
  sc.wifi_load = PoissonLoad{400.0};
  EXPECT_EQ(synthesize_trace(sc, tl).snapshots, synthesize_trace(sc, tl).snapshots);
  auto other = sc;
  other.rng_seed = 43;
  EXPECT_NE(synthesize_trace(sc, tl).snapshots, synthesize_trace(other, tl).snapshots);
}

TEST(Synth, StrongRegimeDefersDuringEnergy) {
  const auto tl = timeline(0.080, 0.33, 8.0);
  const auto out = synthesize_trace(scenario(Regime::Strong), tl);
  const auto w = snapshots_to_window(out.snapshots);
  EXPECT_NEAR(mean_other(w), 33.0, 1.0);

  // OTHER_BUSY matches transmitted energy within one frame per ON interval.
  const auto t = totals(out.snapshots);
  const double energy_ticks = tl.transmitted_s() * kTickRateHz;
  const double slack = static_cast<double>(tl.on_intervals.size()) * 1.5e-3 * kTickRateHz;
  EXPECT_NEAR(static_cast<double>(t.ed), energy_ticks, slack);
  // At most the frame caught in flight at each ON onset fails.
  EXPECT_LE(t.acks, tl.on_intervals.size());
  EXPECT_DOUBLE_EQ(out.truth.link(kDefaultLink).airtime, 1.0 - 0.33);
}

TEST(Synth, WeakRegimeIgnoresLteu) {
  const auto tl = timeline(0.080, 0.33, 2.0);
  const auto out = synthesize_trace(scenario(Regime::Weak), tl);
  const auto t = totals(out.snapshots);
  EXPECT_EQ(t.ed, 0u);
  EXPECT_EQ(t.acks, 0u);
  EXPECT_EQ(out.truth.link(kDefaultLink).airtime, 1.0);
}

TEST(Synth, MediumRegimeFailsOverlappingFrames) {
  const auto tl = timeline(0.080, 0.33, 4.0);
  const auto out = synthesize_trace(scenario(Regime::Medium), tl);
  const auto w = snapshots_to_window(out.snapshots);
  std::size_t fails = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w.samples[i].s_ack_fail == 0) continue;
    fails += w.samples[i].s_ack_fail;
    const double t = static_cast<double>(i) / w.sample_rate_hz;
    EXPECT_TRUE(inside_on(tl, t, 2e-3)) << "ack fail outside ON at " << t;
  }
  EXPECT_GT(fails, 100u);
  EXPECT_EQ(totals(out.snapshots).ed, 0u);
  EXPECT_DOUBLE_EQ(out.truth.link(kDefaultLink).airtime, 1.0 - 0.33);
}

TEST(Synth, PoissonLoadLeavesIdleTime) {
  const auto tl = timeline(0.080, 0.33, 2.0);
  auto sc = scenario(Regime::Weak);
  sc.wifi_load = PoissonLoad{200.0};
  const auto t = totals(synthesize_trace(sc, tl).snapshots);
  const double busy = static_cast<double>(t.tx + t.rx) / (2.0 * kTickRateHz);
  EXPECT_NEAR(busy, 200.0 * 1.5e-3, 0.05);
}

TEST(Synth, GroundTruthMatchesClosedForms) {
  // No puncturing, whole periods: exactly 1 - duty.
  const auto plain = timeline(0.080, 0.33, 0.8);
  EXPECT_DOUBLE_EQ(true_airtime(Regime::Strong, plain, 1.5e-3), 1.0 - 0.33);
  EXPECT_DOUBLE_EQ(true_airtime(Regime::Medium, plain, 1.5e-3), 1.0 - 0.33);
  EXPECT_DOUBLE_EQ(true_airtime(Regime::Medium, plain, 1.5e-3, 0.5), 1.0 - 0.5 * 0.33);
  EXPECT_EQ(true_airtime(Regime::Weak, plain, 1.5e-3), 1.0);
  // 1 ms puncture gaps cannot hold a 1.5 ms frame, so the ON phase stays blocked.
  const auto punct = timeline(0.080, 0.33, 0.8, 0.001);
  EXPECT_DOUBLE_EQ(true_airtime(Regime::Strong, punct, 1.5e-3), 1.0 - 0.33);
  // A short frame fits into every 1 ms gap: 2 gaps of 1 ms reclaimed per period.
  EXPECT_NEAR(true_airtime(Regime::Strong, punct, 0.5e-3), 1.0 - (0.0264 - 0.002) / 0.080, 1e-12);
  EXPECT_EQ(true_airtime(Regime::Strong, empty_timeline(1.0), 1.5e-3), 1.0);
}

TEST(Synth, TruthIgnoresTrailingPartialPeriod) {
  const auto tl = timeline(0.080, 0.33, 1.0);
  EXPECT_DOUBLE_EQ(true_airtime(Regime::Strong, tl, 1.5e-3), 1.0 - 0.33);
}

TEST(Synth, SlottedFailuresStayInOwnSlots) {
  const auto tl = timeline(0.080, 0.33, 2.0);
  std::map<std::string, SynthScenario> links = {{"A", scenario(Regime::Medium)}, {"B", scenario(Regime::Weak)}};
  SlotSchedule sched{0.050, {"A", "B"}};
  const auto out = synthesize_slotted_trace(links, sched, tl, 2000.0, 7);
  const auto w = snapshots_to_window(out.snapshots);
  ASSERT_EQ(out.sample_links.size(), w.size());
  std::size_t a_fails = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (out.sample_links[i] == "B") EXPECT_EQ(w.samples[i].s_ack_fail, 0u) << i;
    else a_fails += w.samples[i].s_ack_fail;
    EXPECT_EQ(out.sample_links[i], sched.link_at(static_cast<double>(i) / 2000.0));
  }
  EXPECT_GT(a_fails, 0u);
  EXPECT_DOUBLE_EQ(out.truth.link("A").airtime, 1.0 - 0.33);
  EXPECT_EQ(out.truth.link("B").airtime, 1.0);
}

TEST(Synth, SingleLinkScheduleMatchesPlainTrace) {
  const auto tl = timeline(0.080, 0.33, 1.0);
  auto sc = scenario(Regime::Medium, 5);
  const auto plain = synthesize_trace(sc, tl);
  const auto slotted = synthesize_slotted_trace({{"A", sc}}, SlotSchedule{0.02, {"A"}}, tl, 2000.0, 5);
  EXPECT_EQ(plain.snapshots, slotted.snapshots);
}

TEST(Synth, EmptyTimelineGivesFullAirtime) {
  std::map<std::string, SynthScenario> links = {{"A", scenario(Regime::Strong)}, {"B", scenario(Regime::Medium)}};
  const auto out = synthesize_slotted_trace(links, SlotSchedule{0.05, {"A", "B"}}, empty_timeline(1.0), 2000.0, 1);
  EXPECT_EQ(out.truth.link("A").airtime, 1.0);
  EXPECT_EQ(out.truth.link("B").airtime, 1.0);
  EXPECT_EQ(totals(out.snapshots).acks, 0u);
}

TEST(Synth, UnknownLinkThrows) {
  std::map<std::string, SynthScenario> links = {{"A", scenario(Regime::Strong)}};
  try {
    synthesize_slotted_trace(links, SlotSchedule{0.05, {"A", "C"}}, empty_timeline(1.0), 2000.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownLink);
  }
}

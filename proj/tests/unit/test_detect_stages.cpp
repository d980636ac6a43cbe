#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "support.hpp"
#include "wiplus/core/error.hpp"
#include "wiplus/detect/stages.hpp"

using namespace wiplus;
using namespace wiplus::detect;
using wiplus::testing::burst_train;
using wiplus::testing::window_from;

namespace {

MacSample ms(int tx, int rx, int other, std::uint32_t fails = 0) {
  return {tx, rx, other, std::max(0, 100 - tx - rx - other), fails};
}

ExtractedSignal signal_of(std::vector<double> r) {
  ExtractedSignal s;
  s.r = std::move(r);
  s.covered_count = s.r.size();
  for (double v : s.r) s.nonzero_count += v != 0.0;
  s.nonzero_fraction = static_cast<double>(s.nonzero_count) / static_cast<double>(s.r.size());
  return s;
}

// O(n^2) DFT, independent of FFTW.
std::vector<double> naive_power(const std::vector<double>& x, std::size_t n_fft) {
  std::vector<double> p(n_fft / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i % n_fft) /
                                         static_cast<double>(n_fft));
    p[k] = std::norm(acc);
  }
  return p;
}

}  // namespace

TEST(Extract, CaseTable) {
  auto sig = extract_spurious(window_from({ms(0, 0, 40)}));
  EXPECT_EQ(sig.r, std::vector<double>({40}));
  sig = extract_spurious(window_from({ms(100, 0, 0), ms(100, 0, 0), ms(70, 0, 0, 2)}));
  EXPECT_EQ(sig.r, std::vector<double>({100, 100, 70}));
  sig = extract_spurious(window_from({ms(0, 50, 0)}));
  EXPECT_EQ(sig.r, std::vector<double>({0}));
}

TEST(Extract, LookAheadNeedsUnbrokenChain) {
  // 100, 99 breaks the chain, 100 -> fail
  const auto sig = extract_spurious(window_from({ms(100, 0, 0), ms(99, 0, 0), ms(100, 0, 0), ms(50, 0, 0, 1)}));
  EXPECT_EQ(sig.r, std::vector<double>({0, 0, 100, 50}));
  // A chain running into the window end without a failure yields nothing.
  const auto tail = extract_spurious(window_from({ms(100, 0, 0), ms(100, 0, 0)}));
  EXPECT_EQ(tail.r, std::vector<double>({0, 0}));
}

TEST(Extract, UncoveredSamplesBreakChains) {
  auto w = window_from({ms(100, 0, 0), ms(100, 0, 0), ms(60, 0, 0, 1)});
  w.covered = {true, false, true};
  const auto sig = extract_spurious(w);
  EXPECT_EQ(sig.r, std::vector<double>({0, 0, 60}));
  EXPECT_EQ(sig.covered_count, 2u);
  EXPECT_DOUBLE_EQ(sig.nonzero_fraction, 0.5);
}

// Property: changing sample t cannot affect r at t' < t unless a full-TX chain links them.
TEST(Extract, PropertyLocality) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<MacSample> s(40);
    for (auto& m : s) {
      const int kind = static_cast<int>(rng() % 4);
      m = kind == 0 ? ms(0, 0, static_cast<int>(rng() % 101))
          : kind == 1 ? ms(100, 0, 0, static_cast<std::uint32_t>(rng() % 2))
                      : ms(static_cast<int>(rng() % 90), static_cast<int>(rng() % 10), 0,
                           static_cast<std::uint32_t>(rng() % 3 == 0));
    }
    const std::size_t t = rng() % s.size();
    auto changed = s;
    changed[t] = ms(static_cast<int>(rng() % 101), 0, 0, static_cast<std::uint32_t>(rng() % 2));
    const auto a = extract_spurious(window_from(s)).r;
    const auto b = extract_spurious(window_from(changed)).r;
    for (std::size_t u = 0; u < s.size(); ++u) {
      if (u == t) continue;
      bool linked = u < t;
      for (std::size_t v = u; linked && v < t; ++v) linked = s[v].s_tx == 100 && changed[v].s_tx == 100;
      if (!linked) EXPECT_EQ(a[u], b[u]) << "trial " << trial << " t=" << t << " u=" << u;
    }
  }
}

TEST(DensityGate, BoundaryAtOnePercent) {
  std::vector<double> r(2000, 0.0);
  for (int i = 0; i < 20; ++i) r[static_cast<std::size_t>(i * 50)] = 10.0;
  EXPECT_FALSE(density_gate(signal_of(r)));
  r[7] = 5.0;
  EXPECT_TRUE(density_gate(signal_of(r)));
  EXPECT_FALSE(density_gate(signal_of(std::vector<double>(2000, 0.0))));
}

TEST(Spectrum, MatchesNaiveDft) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {7u, 64u, 250u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(rng() % 1000) / 10.0 - 50.0;
    for (std::size_t pad : {1u, 4u}) {
      const auto fast = power_spectrum(x, n * pad);
      const auto ref = naive_power(x, n * pad);
      ASSERT_EQ(fast.size(), ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(fast[k], ref[k], 1e-7 * (1.0 + ref[k]));
    }
  }
}

TEST(Spectrum, SquareWave80ms) {
  const auto r = burst_train(0.080, 0.0264, 0.013, 2000.0, 2000);
  const auto peaks = detect_pwm_frequency(signal_of(r), 2000.0);
  ASSERT_TRUE(peaks);
  EXPECT_NEAR(peaks->f0_hz, 12.5, 0.25);
  EXPECT_NEAR(peaks->f1_hz, 25.0, 0.5);
  EXPECT_NEAR(peaks->f2_hz, 37.5, 0.5);
  // Fourier series of a duty-d pulse train: |c_m|^2 ∝ sin^2(pi m d) / m^2.
  const double d = 0.33;
  const auto line = [&](int m) { return std::pow(std::sin(std::numbers::pi * m * d) / m, 2); };
  EXPECT_NEAR(peaks->magnitudes[1], line(2) / line(1), 0.08);
}

TEST(Spectrum, SquareWave160ms) {
  const auto r = burst_train(0.160, 0.0528, 0.071, 2000.0, 2000);
  const auto peaks = detect_pwm_frequency(signal_of(r), 2000.0);
  ASSERT_TRUE(peaks);
  EXPECT_NEAR(peaks->f0_hz, 6.25, 0.25);
}

TEST(Spectrum, HalfDutyUsesDominance) {
  // Even harmonics vanish at 50 % duty.
  const auto r = burst_train(0.080, 0.040, 0.0, 2000.0, 2000);
  const auto peaks = detect_pwm_frequency(signal_of(r), 2000.0);
  ASSERT_TRUE(peaks);
  EXPECT_NEAR(peaks->f0_hz, 12.5, 0.25);
}

TEST(Spectrum, SparseWhiteNoiseAborts) {
  int aborted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> r(2000, 0.0);
    for (std::size_t i = 0; i < 100; ++i) r[rng() % r.size()] = 1.0 + static_cast<double>(rng() % 100);
    aborted += !detect_pwm_frequency(signal_of(r), 2000.0).has_value();
  }
  EXPECT_GE(aborted, 95);
}

TEST(Spectrum, FlatSignalAborts) {
  EXPECT_FALSE(detect_pwm_frequency(signal_of(std::vector<double>(2000, 100.0)), 2000.0));
}

TEST(Cluster, ThreeCleanBursts) {
  std::vector<double> r(2000, 0.0);
  for (double mid : {0.1, 0.5, 0.9})
    for (long i = -20; i < 20; ++i) r[static_cast<std::size_t>(std::lround(mid * 2000) + i)] = 100;
  Rng rng(1);
  const auto c = cluster_bursts(signal_of(r), 2.5, 2000.0, rng);  // k0 = 3
  ASSERT_EQ(c.k, 3);
  EXPECT_NEAR(c.centers_s[0], 0.1, 1.0 / 2000);
  EXPECT_NEAR(c.centers_s[1], 0.5, 1.0 / 2000);
  EXPECT_NEAR(c.centers_s[2], 0.9, 1.0 / 2000);
}

TEST(Cluster, SingleBurstClampsToOne) {
  std::vector<double> r(2000, 0.0);
  for (std::size_t i = 900; i < 953; ++i) r[i] = 100;
  Rng rng(1);
  const auto c = cluster_bursts(signal_of(r), 0.9, 2000.0, rng);  // k0 = 1, candidates 1..3
  ASSERT_EQ(c.k, 1);
  EXPECT_NEAR(c.centers_s[0], 926.5 / 2000.0, 1e-9);
}

TEST(Cluster, FarNoiseSamplesMasked) {
  // 12 bursts starting at 40 + 80k ms; noise 45 ms after five of the burst starts, inside the OFF gaps.
  std::vector<double> r(2000, 0.0);
  for (std::size_t k = 0; k < 12; ++k) std::fill_n(r.begin() + static_cast<long>(80 + 160 * k), 53, 100.0);
  const std::size_t noise[] = {170, 490, 810, 1130, 1770};
  for (std::size_t i : noise) r[i] = 100;
  Rng rng(1);
  const auto c = cluster_bursts(signal_of(r), 12.5, 2000.0, rng);
  EXPECT_EQ(c.k, 12);
  for (std::size_t i : noise) EXPECT_FALSE(c.kept_mask[i]) << i;
  for (std::size_t i = 0; i < 2000; ++i)
    if (c.kept_mask[i]) EXPECT_GT(r[i], 0.0);
}

TEST(Lowpass, ConstantZeroAndGapBridging) {
  const std::vector<double> c(500, 42.0);
  for (double v : lowpass_smooth(c, 12.5, 2000.0)) EXPECT_NEAR(v, 42.0, 1e-9);
  for (double v : lowpass_smooth(std::vector<double>(100, 0.0), 12.5, 2000.0)) EXPECT_EQ(v, 0.0);

  auto burst = burst_train(0.080, 0.0264, 0.010, 2000.0, 2000);
  burst[40] = burst[41] = 0.0;  // 1 ms puncture inside the first burst (samples 20..72)
  const auto y = lowpass_smooth(burst, 12.5, 2000.0);
  const double peak = *std::max_element(y.begin(), y.end());
  EXPECT_GT(y[40], 0.2 * peak);
  EXPECT_GT(y[41], 0.2 * peak);
}

TEST(OnTime, RunsWithBoundaryAndShortOutlier) {
  // Runs of 53, 53, 52 interior samples, plus a 4-sample run touching the end.
  std::vector<double> x(400, 0.0);
  auto fill = [&](std::size_t a, std::size_t len) { std::fill_n(x.begin() + static_cast<long>(a), len, 1.0); };
  fill(20, 53);
  fill(120, 53);
  fill(220, 52);
  fill(396, 4);
  EXPECT_NEAR(estimate_on_time(x, 2000.0), (53.0 + 53.0 + 52.0) / 3.0 / 2000.0, 1e-12);
  // A short interior run is dropped as an outlier (< 25 % of the median).
  fill(320, 4);
  EXPECT_NEAR(estimate_on_time(x, 2000.0), (53.0 + 53.0 + 52.0) / 3.0 / 2000.0, 1e-12);
}

TEST(OnTime, SingleRunAndEmpty) {
  std::vector<double> x(200, 0.0);
  std::fill_n(x.begin() + 50, 53, 1.0);
  EXPECT_NEAR(estimate_on_time(x, 2000.0), 0.0265, 1e-12);
  std::vector<double> edge(200, 0.0);
  std::fill_n(edge.begin(), 30, 1.0);
  std::fill_n(edge.begin() + 180, 20, 1.0);
  try {
    estimate_on_time(edge, 2000.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySignal);
  }
}

TEST(Airtime, Formula) {
  EXPECT_NEAR(compute_airtime(0.0264, 12.5), 0.67, 1e-12);
  EXPECT_EQ(compute_airtime(0.0, 12.5), 1.0);
  EXPECT_NEAR(compute_airtime(0.080, 12.5), 0.0, 1e-12);
  EXPECT_EQ(compute_airtime(0.083, 12.5), 0.0);  // 1.0375: clamped
  try {
    compute_airtime(0.09, 12.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InconsistentEstimate);
  }
}

// Property: uniform amplitude scaling leaves every timing result unchanged.
TEST(Stages, PropertyScaleRobustness) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto w = wiplus::testing::synth_window(synth::Regime::Medium, 0.080, 0.33, seed);
    const auto sig = extract_spurious(w);
    for (double alpha : {1.0, 0.5, 0.07}) {
      auto scaled = sig;
      for (auto& v : scaled.r) v *= alpha;
      const auto p0 = detect_pwm_frequency(sig, 2000.0);
      const auto p1 = detect_pwm_frequency(scaled, 2000.0);
      ASSERT_TRUE(p0 && p1);
      EXPECT_NEAR(p0->f0_hz, p1->f0_hz, 1e-9);
      Rng r0(seed), r1(seed);
      const auto c0 = cluster_bursts(sig, p0->f0_hz, 2000.0, r0);
      const auto c1 = cluster_bursts(scaled, p1->f0_hz, 2000.0, r1);
      EXPECT_EQ(c0.k, c1.k);
      EXPECT_EQ(c0.kept_mask, c1.kept_mask);
      std::vector<double> k0(sig.r.size()), k1(sig.r.size());
      for (std::size_t i = 0; i < k0.size(); ++i) {
        k0[i] = c0.kept_mask[i] ? sig.r[i] : 0.0;
        k1[i] = c1.kept_mask[i] ? scaled.r[i] : 0.0;
      }
      const double t0 = estimate_on_time(lowpass_smooth(k0, p0->f0_hz, 2000.0), k0, c0, {}, 2000.0);
      const double t1 = estimate_on_time(lowpass_smooth(k1, p1->f0_hz, 2000.0), k1, c1, {}, 2000.0);
      EXPECT_NEAR(t0, t1, 1e-12);
    }
  }
}

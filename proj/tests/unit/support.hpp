#pragma once

#include <string>
#include <vector>

#include "wiplus/core/random.hpp"
#include "wiplus/core/window.hpp"
#include "wiplus/synth/synthesizer.hpp"

namespace wiplus::testing {

inline synth::LteuTimeline make_timeline(double period, double duty, double duration, std::uint64_t seed,
                                         bool random_phase = true) {
  LteuConfig c;
  c.csat_period_s = period;
  c.duty_cycle = duty;
  Rng rng(seed);
  if (random_phase) c.phase_offset_s = uniform01(rng) * period;
  return synth::build_lteu_timeline(c, duration, rng);
}

inline SampleWindow synth_window(synth::Regime regime, double period, double duty, std::uint64_t seed,
                                 double duration = 1.0) {
  synth::SynthScenario sc;
  sc.regime = regime;
  sc.rng_seed = seed;
  const auto tl = make_timeline(period, duty, duration, seed);
  return snapshots_to_window(synth::synthesize_trace(sc, tl).snapshots);
}

inline SampleWindow window_from(const std::vector<MacSample>& samples) {
  SampleWindow w;
  w.samples = samples;
  return w;
}

// Rectangular burst train sampled at fs: value inside bursts, 0 elsewhere.
inline std::vector<double> burst_train(double period, double on, double phase, double fs, std::size_t n,
                                       double value = 100.0) {
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs - phase;
    const double m = t - period * std::floor(t / period);
    if (m < on) r[i] = value;
  }
  return r;
}

}  // namespace wiplus::testing

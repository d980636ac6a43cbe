#include "wiplus/synth/timeline.hpp"

#include <algorithm>
#include <cmath>

#include "wiplus/core/error.hpp"

namespace wiplus::synth {

double LteuTimeline::transmitted_s() const {
  double total = 0.0;
  for (const auto& iv : on_intervals) total += iv.length();
  return total;
}

LteuTimeline build_lteu_timeline(const LteuConfig& config, double duration_s, Rng& rng) {
  config.validate();
  if (!(duration_s >= config.csat_period_s))
    throw Error(ErrorCode::InvalidConfig, "duration shorter than one CSAT period");

  LteuTimeline tl;
  tl.config = config;
  tl.duration_s = duration_s;

  const double period = config.csat_period_s;
  const double span = config.on_duration_s();
  const double offset = config.phase_offset_s - std::floor(config.phase_offset_s / period) * period;

  // Phase k starts at offset + k*period; k = -1 catches a phase running into t = 0.
  for (long k = -1;; ++k) {
    const double phase = offset + static_cast<double>(k) * period;
    if (phase >= duration_s) break;

    double fraction = 1.0;
    if (const auto* u = std::get_if<UniformLoad>(&config.on_load))
      fraction = u->lo + (u->hi - u->lo) * uniform01(rng);
    const double loaded = span * fraction;

    std::vector<Interval> pieces;
    if (config.punctured()) {
      const double p = config.puncture_period_s;
      const double gap = config.puncture_len_s;
      double cursor = 0.0;
      for (long j = 1; static_cast<double>(j) * p <= loaded + 1e-12; ++j) {
        const double gap_start = static_cast<double>(j) * p - gap;
        pieces.push_back({phase + cursor, phase + gap_start});
        cursor = static_cast<double>(j) * p;
      }
      if (cursor < loaded) pieces.push_back({phase + cursor, phase + loaded});
    } else {
      pieces.push_back({phase, phase + loaded});
    }

    for (auto iv : pieces) {
      iv.start_s = std::max(iv.start_s, 0.0);
      iv.end_s = std::min(iv.end_s, duration_s);
      if (iv.end_s > iv.start_s) tl.on_intervals.push_back(iv);
    }
  }
  return tl;
}

LteuTimeline empty_timeline(double duration_s) {
  LteuTimeline tl;
  tl.duration_s = duration_s;
  return tl;
}

}  // namespace wiplus::synth

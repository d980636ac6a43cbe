#pragma once

#include <vector>

#include "wiplus/core/random.hpp"
#include "wiplus/core/types.hpp"

namespace wiplus::synth {

struct Interval {
  double start_s = 0.0;
  double end_s = 0.0;
  double length() const { return end_s - start_s; }
  bool operator==(const Interval&) const = default;
};

/// Instants at which the LTE-U base station actually radiates.
struct LteuTimeline {
  std::vector<Interval> on_intervals;  // sorted, disjoint, inside [0, duration_s]
  LteuConfig config;
  double duration_s = 0.0;

  double transmitted_s() const;
  double effective_duty() const { return duration_s > 0.0 ? transmitted_s() / duration_s : 0.0; }
};

/// Lays the CSAT grid over [0, duration_s). ON phases start at
/// phase_offset_s + k * period; a partially loaded phase keeps its leading
/// fraction, then puncture gaps of puncture_len_s end every puncture_period_s
/// measured from the phase start (only gaps that fit inside the loaded span).
LteuTimeline build_lteu_timeline(const LteuConfig& config, double duration_s, Rng& rng);

/// Timeline with no LTE-U energy at all.
LteuTimeline empty_timeline(double duration_s);

}  // namespace wiplus::synth

#pragma once

#include <span>

#include "wiplus/core/types.hpp"

namespace wiplus {

/// Converts consecutive register polls into per-sample dwell percentages.
///
/// Counter deltas are corrected for a single 32-bit wrap and normalised to the
/// actual interval between the two polls, so jittered polling is tolerated.
/// Each percentage is rounded half-up; if the rounded four do not sum to
/// 100 +/- 1 the components with the largest rounding residue are nudged back.
///
/// Throws Error(InvalidArgument) for fewer than two snapshots,
/// Error(NonMonotonicTimestamps) and Error(WrapAmbiguity) when an interval
/// exceeds 2^32 ticks.
SampleWindow snapshots_to_window(std::span<const RegisterSnapshot> snapshots,
                                 double sample_rate_hz = kDefaultSampleRateHz);

/// Difference of two raw 32-bit counter readings modulo 2^32.
constexpr std::uint32_t counter_delta(std::uint32_t before, std::uint32_t after) {
  return after - before;
}

}  // namespace wiplus

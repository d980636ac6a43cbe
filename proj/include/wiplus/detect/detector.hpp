#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wiplus/detect/stages.hpp"

namespace wiplus::detect {

struct DetectorOptions {
  SpectrumOptions spectrum;
  OnTimeOptions on_time;
  double min_link_coverage = 0.1;
};

/// Full pipeline on one window. EmptySignal from the on-time stage is
/// reported as NoInterference; InconsistentEstimate propagates.
DetectionReport detect(const SampleWindow& window, Rng& rng, const DetectorOptions& opts = {});

/// Runs detect once per scheduled link on a copy of the window in which the
/// other links' samples are blanked (kept at their original time positions).
/// `labels` names the link served at each sample. Throws
/// Error(InsufficientSlotCoverage) when a link owns < min_link_coverage of it.
std::map<std::string, DetectionReport> detect_per_link(const SampleWindow& window,
                                                       std::span<const std::string> labels,
                                                       const SlotSchedule& schedule, Rng& rng,
                                                       const DetectorOptions& opts = {});

/// Window i uses Rng(derive_seed(seed, i)); both variants return identical reports.
std::vector<DetectionReport> detect_batch(std::span<const SampleWindow> windows, std::uint64_t seed,
                                          const DetectorOptions& opts = {});
std::vector<DetectionReport> detect_batch_serial(std::span<const SampleWindow> windows, std::uint64_t seed,
                                                 const DetectorOptions& opts = {});

/// Splits a window into consecutive chunks of `length` samples (remainder dropped).
std::vector<SampleWindow> split_window(const SampleWindow& window, std::size_t length);

}  // namespace wiplus::detect

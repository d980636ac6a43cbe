#include "wiplus/detect/detector.hpp"

#include <algorithm>

#include "wiplus/core/error.hpp"

namespace wiplus::detect {
namespace {

DetectionReport aborted(const SampleWindow& window, AbortReason reason) {
  DetectionReport r;
  r.status = DetectionStatus::Aborted;
  r.reason = reason;
  r.window_start_s = window.window_start_s;
  return r;
}

}  // namespace

DetectionReport detect(const SampleWindow& window, Rng& rng, const DetectorOptions& opts) {
  if (window.size() < 2) throw Error(ErrorCode::InvalidArgument, "window needs at least two samples");
  if (!window.covered.empty() && window.covered.size() != window.size())
    throw Error(ErrorCode::InvalidArgument, "coverage mask length differs from window");

  const double fs = window.sample_rate_hz;
  const ExtractedSignal sig = extract_spurious(window);
  if (!density_gate(sig)) return aborted(window, AbortReason::InsufficientSamples);

  const auto peaks = detect_pwm_frequency(sig, fs, opts.spectrum);
  if (!peaks) return aborted(window, AbortReason::NoPeriodicSpectrum);

  const BurstClusters clusters = cluster_bursts(sig, peaks->f0_hz, fs, rng);
  std::vector<double> kept(sig.r.size(), 0.0);
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (clusters.kept_mask[i]) kept[i] = sig.r[i];
  const std::vector<double> smoothed = lowpass_smooth(kept, peaks->f0_hz, fs);

  DetectionReport report;
  report.window_start_s = window.window_start_s;
  report.f0_hz = peaks->f0_hz;
  report.harmonics_hz = {peaks->f1_hz, peaks->f2_hz};
  try {
    if (window.covered.empty()) {
      report.t_on_s = estimate_on_time(smoothed, kept, clusters, window.covered, fs, opts.on_time);
    } else {
      const double share = occupied_fraction(smoothed, kept, clusters, window.covered, opts.on_time);
      if (share <= 0.0) throw Error(ErrorCode::EmptySignal, "no ON samples in covered slots");
      report.t_on_s = share / peaks->f0_hz;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptySignal) throw;
    report.status = DetectionStatus::NoInterference;
    return report;
  }
  report.airtime_estimate = compute_airtime(report.t_on_s, report.f0_hz);
  report.status = DetectionStatus::Detected;
  for (double c : clusters.centers_s) report.burst_starts_s.push_back(window.window_start_s + c - report.t_on_s / 2.0);
  return report;
}

std::map<std::string, DetectionReport> detect_per_link(const SampleWindow& window,
                                                       std::span<const std::string> labels,
                                                       const SlotSchedule& schedule, Rng& rng,
                                                       const DetectorOptions& opts) {
  schedule.validate();
  if (labels.size() != window.size())
    throw Error(ErrorCode::InvalidArgument, "one link label per sample required");

  std::map<std::string, DetectionReport> out;
  for (const auto& link : schedule.links()) {
    SampleWindow sub = window;
    sub.covered.assign(window.size(), false);
    std::size_t owned = 0;
    for (std::size_t i = 0; i < window.size(); ++i) {
      const bool mine = labels[i] == link && window.is_covered(i);
      sub.covered[i] = mine;
      owned += mine;
      if (!mine) sub.samples[i] = MacSample{0, 0, 0, 100, 0};
    }
    if (static_cast<double>(owned) < opts.min_link_coverage * static_cast<double>(window.size()))
      throw Error(ErrorCode::InsufficientSlotCoverage, "link '" + link + "' owns " + std::to_string(owned) +
                                                           " of " + std::to_string(window.size()) + " samples");
    if (owned == window.size()) sub.covered = window.covered;
    DetectionReport r = detect(sub, rng, opts);
    r.link = link;
    out.emplace(link, std::move(r));
  }
  return out;
}

std::vector<DetectionReport> detect_batch_serial(std::span<const SampleWindow> windows, std::uint64_t seed,
                                                 const DetectorOptions& opts) {
  std::vector<DetectionReport> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    out[i] = detect(windows[i], rng, opts);
  }
  return out;
}

std::vector<DetectionReport> detect_batch(std::span<const SampleWindow> windows, std::uint64_t seed,
                                          const DetectorOptions& opts) {
  std::vector<DetectionReport> out(windows.size());
  const auto n = static_cast<long>(windows.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      out[static_cast<std::size_t>(i)] = detect(windows[static_cast<std::size_t>(i)], rng, opts);
    } catch (...) {
#pragma omp critical(wiplus_detect_batch)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<SampleWindow> split_window(const SampleWindow& window, std::size_t length) {
  if (length == 0) throw Error(ErrorCode::InvalidArgument, "window length must be positive");
  std::vector<SampleWindow> out;
  for (std::size_t start = 0; start + length <= window.size(); start += length) {
    SampleWindow w;
    w.sample_rate_hz = window.sample_rate_hz;
    w.window_start_s = window.window_start_s + static_cast<double>(start) / window.sample_rate_hz;
    w.samples.assign(window.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     window.samples.begin() + static_cast<std::ptrdiff_t>(start + length));
    if (!window.covered.empty())
      w.covered.assign(window.covered.begin() + static_cast<std::ptrdiff_t>(start),
                       window.covered.begin() + static_cast<std::ptrdiff_t>(start + length));
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace wiplus::detect

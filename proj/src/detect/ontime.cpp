#include <algorithm>
#include <cmath>
#include <numbers>

#include "wiplus/core/error.hpp"
#include "wiplus/detect/stages.hpp"

namespace wiplus::detect {
namespace {

struct Run {
  std::size_t first;
  std::size_t last;  // inclusive
  bool clean = true;
  std::size_t length() const { return last - first + 1; }
};

std::vector<Run> segments_above(std::span<const double> x, double threshold) {
  std::vector<Run> runs;
  std::size_t i = 0;
  while (i < x.size()) {
    if (x[i] <= threshold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < x.size() && x[j + 1] > threshold) ++j;
    runs.push_back({i, j});
    i = j + 1;
  }
  return runs;
}

double median_length(const std::vector<Run>& runs) {
  std::vector<double> len;
  for (const auto& r : runs) len.push_back(static_cast<double>(r.length()));
  std::sort(len.begin(), len.end());
  const std::size_t m = len.size() / 2;
  return len.size() % 2 ? len[m] : 0.5 * (len[m - 1] + len[m]);
}

double mean_after_outliers(std::vector<Run> runs, double min_fraction, double sample_rate_hz) {
  if (runs.empty()) throw Error(ErrorCode::EmptySignal, "no complete ON segment in window");
  const double cut = min_fraction * median_length(runs);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : runs) {
    if (static_cast<double>(r.length()) < cut) continue;
    sum += static_cast<double>(r.length());
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptySignal, "all ON segments rejected as outliers");
  return sum / static_cast<double>(count) / sample_rate_hz;
}

// One run per (segment, cluster) pair, spanning the kept samples it holds.
std::vector<Run> cluster_runs(std::span<const double> smoothed, std::span<const double> kept_r,
                              const BurstClusters& clusters, const std::vector<bool>& covered,
                              const OnTimeOptions& opts) {
  const std::size_t n = smoothed.size();
  if (kept_r.size() != n || clusters.labels.size() != n || (!covered.empty() && covered.size() != n))
    throw Error(ErrorCode::InvalidArgument, "signal lengths differ");
  const double peak = n ? *std::max_element(smoothed.begin(), smoothed.end()) : 0.0;
  if (!(peak > 0.0)) throw Error(ErrorCode::EmptySignal, "smoothed signal is zero");
  const auto is_covered = [&](std::size_t i) { return i < n && (covered.empty() || covered[i]); };

  std::vector<Run> runs;
  for (const auto& seg : segments_above(smoothed, opts.threshold_fraction * peak)) {
    std::size_t i = seg.first;
    while (i <= seg.last) {
      if (kept_r[i] <= 0.0) {
        ++i;
        continue;
      }
      const int label = clusters.labels[i];
      Run run{i, i};
      for (std::size_t j = i; j <= seg.last; ++j)
        if (kept_r[j] > 0.0 && clusters.labels[j] == label) run.last = j;
        else if (kept_r[j] > 0.0) break;
      i = run.last + 1;
      run.clean = run.first > 0 && is_covered(run.first - 1) && is_covered(run.last + 1);
      runs.push_back(run);
    }
  }
  return runs;
}

}  // namespace

std::vector<double> lowpass_smooth(std::span<const double> x, double f0_hz, double sample_rate_hz) {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  const double alpha = 1.0 - std::exp(-2.0 * std::numbers::pi * f0_hz / sample_rate_hz);
  for (std::size_t i = 1; i < y.size(); ++i) y[i] = y[i - 1] + alpha * (y[i] - y[i - 1]);
  for (std::size_t i = y.size() - 1; i-- > 0;) y[i] = y[i + 1] + alpha * (y[i] - y[i + 1]);
  for (auto& v : y) v = std::max(0.0, v);
  return y;
}

double estimate_on_time(std::span<const double> smoothed, double sample_rate_hz, const OnTimeOptions& opts) {
  const double peak = smoothed.empty() ? 0.0 : *std::max_element(smoothed.begin(), smoothed.end());
  if (!(peak > 0.0)) throw Error(ErrorCode::EmptySignal, "smoothed signal is zero");
  std::vector<Run> runs;
  for (const auto& r : segments_above(smoothed, opts.threshold_fraction * peak))
    if (r.first > 0 && r.last + 1 < smoothed.size()) runs.push_back(r);
  return mean_after_outliers(std::move(runs), opts.min_run_fraction, sample_rate_hz);
}

double estimate_on_time(std::span<const double> smoothed, std::span<const double> kept_r,
                        const BurstClusters& clusters, const std::vector<bool>& covered, double sample_rate_hz,
                        const OnTimeOptions& opts) {
  // Runs cut by the window edge or by another link's slot are incomplete.
  std::vector<Run> runs = cluster_runs(smoothed, kept_r, clusters, covered, opts);
  std::erase_if(runs, [](const Run& r) { return !r.clean; });
  return mean_after_outliers(std::move(runs), opts.min_run_fraction, sample_rate_hz);
}

double occupied_fraction(std::span<const double> smoothed, std::span<const double> kept_r,
                         const BurstClusters& clusters, const std::vector<bool>& covered, const OnTimeOptions& opts) {
  const auto runs = cluster_runs(smoothed, kept_r, clusters, covered, opts);
  std::size_t on = 0, total = 0;
  for (std::size_t i = 0; i < smoothed.size(); ++i) total += covered.empty() || covered[i];
  for (const auto& r : runs)
    for (std::size_t i = r.first; i <= r.last; ++i) on += covered.empty() || covered[i];
  return total ? static_cast<double>(on) / static_cast<double>(total) : 0.0;
}

double compute_airtime(double t_on_s, double f0_hz) {
  if (!(t_on_s >= 0.0) || !(f0_hz >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative on-time or frequency");
  const double occupied = t_on_s * f0_hz;
  if (occupied > 1.05)
    throw Error(ErrorCode::InconsistentEstimate, "on-time exceeds the PWM period");
  return std::clamp(1.0 - occupied, 0.0, 1.0);
}

}  // namespace wiplus::detect

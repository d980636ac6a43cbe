#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wiplus/core/random.hpp"
#include "wiplus/core/types.hpp"

namespace wiplus::detect {

/// Spurious-activity signal R_t derived from a window.
struct ExtractedSignal {
  std::vector<double> r;        // 0..100 per sample
  std::vector<bool> covered;    // copied from the window; empty = all samples
  double nonzero_fraction = 0.0;  // over covered samples
  std::size_t nonzero_count = 0;
  std::size_t covered_count = 0;

  bool is_covered(std::size_t i) const { return covered.empty() || covered[i]; }
};

/// Per-sample rule, evaluated in order:
///   s_tx = s_rx = 0                                   -> s_other
///   s_ack_fail > 0                                    -> s_tx
///   s_tx = 100 and a chain of s_tx = 100 samples leads
///   to a sample with s_ack_fail > 0 (look-ahead)       -> s_tx
///   otherwise                                         -> 0
ExtractedSignal extract_spurious(const SampleWindow& window);

/// True when enough samples carry spurious activity: more than 1 % of the
/// covered samples must be nonzero.
bool density_gate(const ExtractedSignal& sig);

struct SpectrumOptions {
  int zero_pad = 4;
  double min_freq_hz = 4.0;  // at least four cycles in a 1 s window
  double harmonic_tolerance_hz = 0.5;
  // Fundamental must stand this far above the local noise floor (median of
  // bins within floor_half_width_hz, excluding the harmonic comb).
  double prominence = 12.0;
  double floor_half_width_hz = 10.0;
  // A harmonic counts as detectable at this multiple of its local floor.
  double harmonic_prominence = 10.0;
  // Fallback when harmonics are missing: every other part of the spectrum
  // must stay at or below this fraction of the fundamental.
  double dominance = 0.5;
  // Lines of the coverage mask spectrum at or above this fraction of its
  // strongest line shift the harmonic comb in the dominance test.
  double mask_line_level = 0.02;
  // f/2 or f/3 replaces f when its local peak reaches this normalised power.
  double subharmonic_level = 0.2;
};

struct SpectrumPeaks {
  double f0_hz = 0.0;
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  std::array<double, 3> magnitudes{};  // normalised power at f0, f1, f2
  bool harmonics_found = false;
};

/// |DFT|^2 of x zero-padded to n_fft, bins 0..n_fft/2.
std::vector<double> power_spectrum(std::span<const double> x, std::size_t n_fft);

/// Frequencies of the spectral lines of a coverage mask (mean removed).
std::vector<double> mask_lines(const std::vector<bool>& covered, std::size_t n_fft, double sample_rate_hz,
                               double level);

/// Fundamental PWM frequency of R_t, or nullopt when the spectrum shows no
/// periodic structure.
std::optional<SpectrumPeaks> detect_pwm_frequency(const ExtractedSignal& sig, double sample_rate_hz,
                                                  const SpectrumOptions& opts = {});

struct BurstClusters {
  int k = 0;
  std::vector<double> centers_s;  // sorted, window-relative
  std::vector<bool> kept_mask;    // true only where r > 0 and the sample survived
  std::vector<int> labels;        // cluster of each kept sample, -1 elsewhere
  double silhouette = 0.0;
};

/// Weighted 1-D k-means over the times of nonzero samples, k chosen by
/// silhouette around k0 = ceil(f0 * duration). A single cluster scores
/// kSingleClusterSilhouette, so a split must show real separation. Members
/// further than twice the median member distance from their center are masked out.
inline constexpr double kSingleClusterSilhouette = 0.7;

BurstClusters cluster_bursts(const ExtractedSignal& sig, double f0_hz, double sample_rate_hz, Rng& rng);

/// Zero-phase first-order low-pass with cutoff f0 (forward then backward), clamped >= 0.
std::vector<double> lowpass_smooth(std::span<const double> x, double f0_hz, double sample_rate_hz);

struct OnTimeOptions {
  double threshold_fraction = 0.2;  // of the smoothed maximum
  double min_run_fraction = 0.25;   // of the median run length
};

/// Mean length of the runs where `smoothed` exceeds the threshold. Runs
/// touching either window edge and runs shorter than min_run_fraction of the
/// median are dropped. Throws Error(EmptySignal) when nothing survives.
double estimate_on_time(std::span<const double> smoothed, double sample_rate_hz, const OnTimeOptions& opts = {});

/// Same segmentation, split further by cluster, with each run measured by the
/// span of its kept R_t samples so the filter's spread does not inflate it.
/// Runs next to uncovered samples are dropped like edge runs.
double estimate_on_time(std::span<const double> smoothed, std::span<const double> kept_r,
                        const BurstClusters& clusters, const std::vector<bool>& covered, double sample_rate_hz,
                        const OnTimeOptions& opts = {});

/// Share of covered samples lying inside the runs above (edge runs included).
/// Used for gated per-link windows, where bursts are rarely seen whole.
double occupied_fraction(std::span<const double> smoothed, std::span<const double> kept_r,
                         const BurstClusters& clusters, const std::vector<bool>& covered,
                         const OnTimeOptions& opts = {});

/// 1 - t_on * f0, clamped to [0, 1]. Throws Error(InconsistentEstimate)
/// when t_on * f0 exceeds 1.05.
double compute_airtime(double t_on_s, double f0_hz);

}  // namespace wiplus::detect

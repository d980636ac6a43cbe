#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "wiplus/detect/stages.hpp"

namespace wiplus::detect {
namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Peak {
  std::size_t bin = 0;
  double value = 0.0;
};

Peak local_max(const std::vector<double>& p, std::size_t lo, std::size_t hi) {
  Peak best{lo, -1.0};
  for (std::size_t k = lo; k <= hi && k < p.size(); ++k)
    if (p[k] > best.value) best = {k, p[k]};
  return best;
}

// Parabolic fit through the log power of the peak and its two neighbours.
double refine_bin(const std::vector<double>& p, std::size_t k) {
  if (k == 0 || k + 1 >= p.size()) return static_cast<double>(k);
  const double a = p[k - 1], b = p[k], c = p[k + 1];
  if (a <= 0.0 || b <= 0.0 || c <= 0.0) return static_cast<double>(k);
  const double la = std::log(a), lb = std::log(b), lc = std::log(c);
  const double den = la - 2.0 * lb + lc;
  if (den >= 0.0) return static_cast<double>(k);
  const double delta = 0.5 * (la - lc) / den;
  return static_cast<double>(k) + std::clamp(delta, -0.5, 0.5);
}

}  // namespace

std::vector<double> mask_lines(const std::vector<bool>& covered, std::size_t n_fft, double sample_rate_hz,
                               double level) {
  const std::size_t n = covered.size();
  double mean = 0.0;
  for (bool c : covered) mean += c;
  mean /= static_cast<double>(std::max<std::size_t>(1, n));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (covered[i] ? 1.0 : 0.0) - mean;
  const std::vector<double> p = power_spectrum(x, n_fft);
  const double top = *std::max_element(p.begin() + 1, p.end());
  std::vector<double> lines;
  if (!(top > 0.0)) return lines;
  const double df = sample_rate_hz / static_cast<double>(n_fft);
  for (std::size_t k = 1; k + 1 < p.size(); ++k)
    if (p[k] >= level * top && p[k] >= p[k - 1] && p[k] > p[k + 1]) lines.push_back(refine_bin(p, k) * df);
  return lines;
}

std::vector<double> power_spectrum(std::span<const double> x, std::size_t n_fft) {
  n_fft = std::max(n_fft, x.size());
  const std::size_t n_out = n_fft / 2 + 1;
  double* in = fftw_alloc_real(n_fft);
  fftw_complex* out = fftw_alloc_complex(n_out);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), in, out, FFTW_ESTIMATE);
  }
  std::fill(in, in + n_fft, 0.0);
  std::copy(x.begin(), x.end(), in);
  fftw_execute(plan);

  std::vector<double> p(n_out);
  for (std::size_t k = 0; k < n_out; ++k) p[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return p;
}

std::optional<SpectrumPeaks> detect_pwm_frequency(const ExtractedSignal& sig, double sample_rate_hz,
                                                  const SpectrumOptions& opts) {
  const std::size_t n = sig.r.size();
  if (n < 2 || sig.covered_count < 2) return std::nullopt;

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (sig.is_covered(i)) mean += sig.r[i];
  mean /= static_cast<double>(sig.covered_count);
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (sig.is_covered(i)) x[i] = sig.r[i] - mean;

  const std::size_t n_fft = n * static_cast<std::size_t>(std::max(1, opts.zero_pad));
  std::vector<double> p = power_spectrum(x, n_fft);
  const double df = sample_rate_hz / static_cast<double>(n_fft);
  const auto to_bin = [&](double f) { return static_cast<std::size_t>(std::max(0.0, std::round(f / df))); };

  const std::size_t lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opts.min_freq_hz / df)));
  const std::size_t hi = p.size() - 1;
  if (lo >= hi) return std::nullopt;

  Peak peak = local_max(p, lo, hi);
  if (!(peak.value > 0.0)) return std::nullopt;
  for (auto& v : p) v /= peak.value;
  peak.value = 1.0;

  const double duration = static_cast<double>(n) / sample_rate_hz;
  const double guard = 1.0 / duration + opts.harmonic_tolerance_hz;
  const std::size_t tol_bins = std::max<std::size_t>(1, to_bin(opts.harmonic_tolerance_hz));
  const auto peak_near = [&](double f) -> Peak {
    const std::size_t c = to_bin(f);
    if (c > hi + tol_bins) return {};
    return local_max(p, c > tol_bins ? std::max(lo, c - tol_bins) : lo, std::min(hi, c + tol_bins));
  };
  // Noise floor around f: median of nearby bins away from the comb of f0.
  const auto floor_near = [&](double f, double f0) {
    const std::size_t c = to_bin(f);
    const std::size_t span = to_bin(opts.floor_half_width_hz);
    std::vector<double> v;
    for (std::size_t k = c > span ? std::max(lo, c - span) : lo; k <= std::min(hi, c + span); ++k) {
      const double fk = static_cast<double>(k) * df;
      const double m = std::max(1.0, std::round(fk / f0));
      if (std::abs(fk - m * f0) > guard) v.push_back(p[k]);
    }
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  const auto prominent = [&](double v, double f, double f0, double factor) {
    const double floor = floor_near(f, f0);
    return floor <= 0.0 ? v > 0.0 : v >= factor * floor;
  };

  double f0 = refine_bin(p, peak.bin) * df;
  if (f0 < opts.min_freq_hz) return std::nullopt;
  if (!prominent(1.0, f0, f0, opts.prominence)) return std::nullopt;

  // The strongest line may be a harmonic when a lower fundamental carries less power.
  for (int d : {2, 3}) {
    const double f = f0 / d;
    if (f < opts.min_freq_hz) continue;
    const Peak sub = peak_near(f);
    const double fs = refine_bin(p, sub.bin) * df;
    if (fs >= opts.min_freq_hz && sub.value >= opts.subharmonic_level && prominent(sub.value, fs, fs, opts.prominence)) {
      f0 = fs;
      peak = sub;
      break;
    }
  }

  SpectrumPeaks out;
  out.f0_hz = f0;
  out.magnitudes[0] = peak.value;
  const Peak h1 = peak_near(2.0 * f0);
  const Peak h2 = peak_near(3.0 * f0);
  out.f1_hz = h1.value > 0.0 ? refine_bin(p, h1.bin) * df : 2.0 * f0;
  out.f2_hz = h2.value > 0.0 ? refine_bin(p, h2.bin) * df : 3.0 * f0;
  out.magnitudes[1] = std::max(0.0, h1.value);
  out.magnitudes[2] = std::max(0.0, h2.value);
  out.harmonics_found = prominent(out.magnitudes[1], out.f1_hz, f0, opts.harmonic_prominence) &&
                        prominent(out.magnitudes[2], out.f2_hz, f0, opts.harmonic_prominence);
  if (out.harmonics_found) return out;

  // Dominance: nothing away from the harmonic comb may rival the fundamental.
  // With a coverage mask, the comb is shifted by every line of the mask's own
  // spectrum (slot gating modulates the bursts).
  std::vector<double> shifts = {0.0};
  if (!sig.covered.empty()) {
    for (double g : mask_lines(sig.covered, n_fft, sample_rate_hz, opts.mask_line_level)) {
      shifts.push_back(g);
      shifts.push_back(-g);
    }
  }
  double off_peak = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    const double f = static_cast<double>(k) * df;
    bool explained = false;
    for (double g : shifts) {
      const double m = std::max(g == 0.0 ? 1.0 : 0.0, std::round((f - g) / f0));
      if (std::abs(f - g - m * f0) <= guard) {
        explained = true;
        break;
      }
    }
    if (!explained) off_peak = std::max(off_peak, p[k]);
  }
  if (off_peak > opts.dominance * peak.value) return std::nullopt;
  return out;
}

}  // namespace wiplus::detect

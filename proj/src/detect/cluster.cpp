#include <algorithm>
#include <cmath>

#include "wiplus/detect/stages.hpp"

namespace wiplus::detect {
namespace {

constexpr int kRestarts = 10;
constexpr int kMaxIterations = 100;

struct Points {
  std::vector<double> t;  // sorted sample-centre times
  std::vector<double> w;
  std::vector<std::size_t> index;
  std::vector<double> prefix;  // prefix sums of t
};

struct Fit {
  std::vector<double> centers;
  std::vector<std::size_t> bounds;  // cluster c holds points [bounds[c], bounds[c+1])
  double inertia = 0.0;
};

// Sorted centres partition sorted 1-D points at the midpoints.
void assign(const Points& p, const std::vector<double>& centers, std::vector<std::size_t>& bounds) {
  const std::size_t k = centers.size();
  bounds.assign(k + 1, 0);
  std::size_t j = 0;
  for (std::size_t c = 0; c + 1 < k; ++c) {
    const double mid = 0.5 * (centers[c] + centers[c + 1]);
    while (j < p.t.size() && p.t[j] < mid) ++j;
    bounds[c + 1] = j;
  }
  bounds[k] = p.t.size();
}

Fit lloyd(const Points& p, std::vector<double> centers, double tol) {
  std::sort(centers.begin(), centers.end());
  std::vector<std::size_t> bounds;
  for (int it = 0; it < kMaxIterations; ++it) {
    assign(p, centers, bounds);
    double moved = 0.0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      double sw = 0.0, st = 0.0;
      for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) {
        sw += p.w[i];
        st += p.w[i] * p.t[i];
      }
      if (sw <= 0.0) continue;
      const double next = st / sw;
      moved = std::max(moved, std::abs(next - centers[c]));
      centers[c] = next;
    }
    std::sort(centers.begin(), centers.end());
    if (moved < tol) break;
  }
  assign(p, centers, bounds);

  Fit fit;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    if (bounds[c] == bounds[c + 1]) continue;  // drop empty clusters
    if (fit.bounds.empty()) fit.bounds.push_back(bounds[c]);
    fit.centers.push_back(centers[c]);
    fit.bounds.push_back(bounds[c + 1]);
    for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) fit.inertia += p.w[i] * (p.t[i] - centers[c]) * (p.t[i] - centers[c]);
  }
  return fit;
}

// Sum of |x - t_i| over points [l, r).
double sum_dist(const Points& p, double x, std::size_t l, std::size_t r) {
  const auto first = p.t.begin() + static_cast<std::ptrdiff_t>(l);
  const auto last = p.t.begin() + static_cast<std::ptrdiff_t>(r);
  const std::size_t m = static_cast<std::size_t>(std::lower_bound(first, last, x) - p.t.begin());
  const double left = x * static_cast<double>(m - l) - (p.prefix[m] - p.prefix[l]);
  const double right = (p.prefix[r] - p.prefix[m]) - x * static_cast<double>(r - m);
  return left + right;
}

double silhouette(const Points& p, const Fit& fit) {
  const std::size_t k = fit.centers.size();
  if (k < 2) return kSingleClusterSilhouette;
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t l = fit.bounds[c], r = fit.bounds[c + 1];
    if (r - l < 2) continue;  // singleton scores 0
    for (std::size_t i = l; i < r; ++i) {
      const double x = p.t[i];
      const double a = sum_dist(p, x, l, r) / static_cast<double>(r - l - 1);
      double b = INFINITY;
      for (std::size_t d = 0; d < k; ++d) {
        if (d == c) continue;
        const std::size_t dl = fit.bounds[d], dr = fit.bounds[d + 1];
        b = std::min(b, sum_dist(p, x, dl, dr) / static_cast<double>(dr - dl));
      }
      const double m = std::max(a, b);
      if (m > 0.0) total += (b - a) / m;
    }
  }
  return total / static_cast<double>(p.t.size());
}

Fit best_fit(const Points& p, std::size_t k, double tol, Rng& rng) {
  const double lo = p.t.front(), hi = p.t.back();
  const double spacing = (hi - lo) / static_cast<double>(k);
  Fit best;
  bool have = false;
  for (int r = 0; r < kRestarts; ++r) {
    std::vector<double> init(k);
    for (std::size_t c = 0; c < k; ++c) {
      init[c] = lo + (static_cast<double>(c) + 0.5) * spacing;
      if (r > 0) init[c] += (uniform01(rng) - 0.5) * spacing;
    }
    Fit f = lloyd(p, std::move(init), tol);
    if (!have || f.inertia < best.inertia) {
      best = std::move(f);
      have = true;
    }
  }
  return best;
}

}  // namespace

BurstClusters cluster_bursts(const ExtractedSignal& sig, double f0_hz, double sample_rate_hz, Rng& rng) {
  const std::size_t n = sig.r.size();
  BurstClusters out;
  out.kept_mask.assign(n, false);
  out.labels.assign(n, -1);

  Points p;
  for (std::size_t i = 0; i < n; ++i) {
    if (sig.r[i] <= 0.0) continue;
    p.t.push_back((static_cast<double>(i) + 0.5) / sample_rate_hz);
    p.w.push_back(sig.r[i]);
    p.index.push_back(i);
  }
  if (p.t.empty()) return out;
  p.prefix.assign(p.t.size() + 1, 0.0);
  for (std::size_t i = 0; i < p.t.size(); ++i) p.prefix[i + 1] = p.prefix[i] + p.t[i];

  const double duration = static_cast<double>(n) / sample_rate_hz;
  const long k0 = std::max(1L, static_cast<long>(std::ceil(f0_hz * duration - 1e-9)));
  const long k_lo = std::max(1L, k0 - 2);
  const long k_hi = std::min<long>(k0 + 2, static_cast<long>(p.t.size()));
  const double tol = 0.5 / sample_rate_hz;

  Fit chosen;
  double chosen_score = -INFINITY;
  long chosen_k = 0;
  for (long k = std::min(k_lo, k_hi); k <= k_hi; ++k) {
    Fit f = best_fit(p, static_cast<std::size_t>(k), tol, rng);
    const double s = silhouette(p, f);
    const bool better = s > chosen_score + 1e-12 ||
                        (std::abs(s - chosen_score) <= 1e-12 && std::abs(k - k0) < std::abs(chosen_k - k0));
    if (better) {
      chosen = std::move(f);
      chosen_score = s;
      chosen_k = k;
    }
  }

  out.k = static_cast<int>(chosen.centers.size());
  out.centers_s = chosen.centers;
  out.silhouette = chosen_score;
  for (std::size_t c = 0; c < chosen.centers.size(); ++c) {
    const std::size_t l = chosen.bounds[c], r = chosen.bounds[c + 1];
    std::vector<double> d;
    d.reserve(r - l);
    for (std::size_t i = l; i < r; ++i) d.push_back(std::abs(p.t[i] - chosen.centers[c]));
    std::vector<double> sorted = d;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double limit = 2.0 * sorted[sorted.size() / 2];
    for (std::size_t i = l; i < r; ++i) {
      if (d[i - l] > limit) continue;
      out.kept_mask[p.index[i]] = true;
      out.labels[p.index[i]] = static_cast<int>(c);
    }
  }
  return out;
}

}  // namespace wiplus::detect

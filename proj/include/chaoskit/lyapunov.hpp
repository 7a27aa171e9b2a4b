#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "chaoskit/embedding.hpp"
#include "chaoskit/neighbors.hpp"
#include "chaoskit/parallel.hpp"

namespace chaoskit {

enum class Norm { max, euclidean };

inline const char* to_string(Norm n) { return n == Norm::max ? "max" : "euclidean"; }

// Mean log distance between initially close trajectory segments, per step
// offset. The initial slope of s(delta_n) estimates the maximal Lyapunov
// exponent.
struct StretchingCurve {
  std::vector<double> s;  // s[delta_n], delta_n = 0..max_delta_n
  int max_delta_n = 0;
  double eps = 0.0;
  int theiler = 0;
  int min_neighbors = 1;
  Norm norm = Norm::max;
  EmbeddingParams params;
  std::size_t reference_count = 0;         // references entering the average
  std::size_t zero_distance_excluded = 0;  // duplicate pairs dropped at delta_n = 0
  std::size_t dropped_references = 0;      // refs whose step mean collapsed to zero
};

struct MleEstimate {
  double lambda = 0.0;  // per observation step
  int k1 = 0;
  int k2 = 0;
  double r_squared = 0.0;
  bool r2_defined = true;
  bool non_positive_slope = false;
  StretchingCurve curve;
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double r_squared = 0.0;
  bool r2_defined = true;
};

inline LineFit ols_fit(const std::vector<double>& s, int k1, int k2) {
  const int n = k2 - k1 + 1;
  double sx = 0.0, sy = 0.0;
  for (int k = k1; k <= k2; ++k) {
    sx += static_cast<double>(k);
    sy += s[static_cast<std::size_t>(k)];
  }
  const double xm = sx / n, ym = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int k = k1; k <= k2; ++k) {
    const double dx = static_cast<double>(k) - xm;
    const double dy = s[static_cast<std::size_t>(k)] - ym;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  if (syy > 0.0) {
    double ssres = 0.0;
    for (int k = k1; k <= k2; ++k) {
      const double resid =
          s[static_cast<std::size_t>(k)] - (ym + fit.slope * (static_cast<double>(k) - xm));
      ssres += resid * resid;
    }
    fit.r_squared = 1.0 - ssres / syy;
  } else {
    fit.r_squared = 0.0;
    fit.r2_defined = false;
  }
  return fit;
}

inline double point_distance(const DelayEmbedding& e, std::size_t i, std::size_t k, Norm norm) {
  return norm == Norm::max ? e.max_distance(i, k) : e.euclidean_distance(i, k);
}

}  // namespace detail

// Stretching-factor curve. Reference points are all embedding points with a
// full future window of max_delta_n steps; their neighbourhood is fixed at
// delta_n = 0 (distance in (0, eps], Theiler-excluded, full window) and then
// followed forward. s_i(delta_n) is the log of the mean neighbour distance,
// and the curve averages s_i over references in index order, so results are
// identical for any thread count.
inline StretchingCurve stretching_factor(const DelayEmbedding& e, double eps, int theiler,
                                         int max_delta_n, int min_neighbors, Norm norm = Norm::max,
                                         unsigned threads = 1) {
  if (!(eps > 0.0)) throw std::invalid_argument("stretching_factor: eps must be > 0");
  if (max_delta_n < 1) throw std::invalid_argument("stretching_factor: max_delta_n must be >= 1");
  if (min_neighbors < 1) throw std::invalid_argument("stretching_factor: min_neighbors must be >= 1");
  if (e.size() <= static_cast<std::size_t>(max_delta_n) + 1)
    throw std::invalid_argument("stretching_factor: embedding too short for max_delta_n");
  const std::size_t refs = e.size() - static_cast<std::size_t>(max_delta_n);

  const NeighborIndex index(e, refs);
  const std::size_t width = static_cast<std::size_t>(max_delta_n) + 1;

  std::vector<double> rows(refs * width, 0.0);
  // 0 = skipped, 1 = retained, 2 = dropped (zero step mean)
  std::vector<std::uint8_t> status(refs, 0);
  std::vector<std::size_t> zero_excluded(refs, 0);

  parallel_for(refs, threads, [&](std::size_t i) {
    auto cands = index.within(i, eps, theiler);
    std::vector<std::size_t> nb;
    nb.reserve(cands.size());
    for (const auto& c : cands) {
      double d0 = c.distance;
      if (norm == Norm::euclidean) {
        d0 = e.euclidean_distance(i, c.index);
        if (d0 > eps) continue;  // max-norm candidate outside the euclidean ball
      }
      if (d0 == 0.0) {
        ++zero_excluded[i];
        continue;
      }
      nb.push_back(c.index);
    }
    if (nb.size() < static_cast<std::size_t>(min_neighbors)) return;
    double* row = &rows[i * width];
    for (std::size_t dn = 0; dn < width; ++dn) {
      double sum = 0.0;
      for (std::size_t j : nb) sum += detail::point_distance(e, i + dn, j + dn, norm);
      const double mean = sum / static_cast<double>(nb.size());
      if (mean <= 0.0) {
        status[i] = 2;
        return;
      }
      row[dn] = std::log(mean);
    }
    status[i] = 1;
  });

  StretchingCurve curve;
  curve.max_delta_n = max_delta_n;
  curve.eps = eps;
  curve.theiler = theiler;
  curve.min_neighbors = min_neighbors;
  curve.norm = norm;
  curve.params = e.params();
  curve.s.assign(width, 0.0);
  for (std::size_t i = 0; i < refs; ++i) {
    curve.zero_distance_excluded += zero_excluded[i];
    if (status[i] == 2) ++curve.dropped_references;
    if (status[i] != 1) continue;
    ++curve.reference_count;
    const double* row = &rows[i * width];
    for (std::size_t dn = 0; dn < width; ++dn) curve.s[dn] += row[dn];
  }
  if (curve.reference_count == 0)
    throw std::runtime_error(
        "stretching_factor: no reference point kept min_neighbors neighbours; increase eps");
  for (std::size_t dn = 0; dn < width; ++dn)
    curve.s[dn] /= static_cast<double>(curve.reference_count);
  return curve;
}

// Escalating-radius wrapper: starts at eps_factor * scale and grows the
// radius by sqrt(2) until at least half of the candidate references keep
// min_neighbors neighbours.
inline StretchingCurve stretching_factor_auto_eps(const DelayEmbedding& e, double scale,
                                                  int theiler, int max_delta_n, int min_neighbors,
                                                  double eps_factor = 0.1, Norm norm = Norm::max,
                                                  unsigned threads = 1) {
  if (!(scale > 0.0)) throw std::invalid_argument("stretching_factor_auto_eps: zero series scale");
  if (e.size() <= static_cast<std::size_t>(max_delta_n) + 1)
    throw std::invalid_argument("stretching_factor: embedding too short for max_delta_n");
  const std::size_t refs = e.size() - static_cast<std::size_t>(max_delta_n);
  const NeighborIndex index(e, refs);

  double eps = eps_factor * scale;
  for (int round = 0; round < 200; ++round) {
    std::vector<std::uint8_t> ok(refs, 0);
    parallel_for(refs, threads, [&](std::size_t i) {
      const auto cands = index.within(i, eps, theiler);
      std::size_t good = 0;
      for (const auto& c : cands) {
        double d0 = c.distance;
        if (norm == Norm::euclidean) {
          d0 = e.euclidean_distance(i, c.index);
          if (d0 > eps) continue;
        }
        if (d0 > 0.0) ++good;
      }
      ok[i] = good >= static_cast<std::size_t>(min_neighbors);
    });
    std::size_t met = 0;
    for (auto v : ok) met += v;
    if (2 * met >= refs) return stretching_factor(e, eps, theiler, max_delta_n, min_neighbors,
                                                  norm, threads);
    eps *= std::sqrt(2.0);
  }
  throw std::runtime_error(
      "stretching_factor_auto_eps: radius escalation failed to reach half the references");
}

inline MleEstimate fit_slope(const StretchingCurve& curve, int k1, int k2) {
  if (k1 < 0 || k2 > curve.max_delta_n || k1 >= k2)
    throw std::invalid_argument("fit_slope: need 0 <= k1 < k2 <= max_delta_n");
  if (k2 - k1 + 1 < 3) throw std::invalid_argument("fit_slope: need at least 3 points");
  const auto fit = detail::ols_fit(curve.s, k1, k2);
  MleEstimate est;
  est.lambda = fit.slope;
  est.k1 = k1;
  est.k2 = k2;
  est.r_squared = fit.r_squared;
  est.r2_defined = fit.r2_defined;
  est.curve = curve;
  return est;
}

// Slides a window over the curve (delta_n >= 1) and keeps the best-r^2 fit
// among positive-slope windows; falls back to the best-r^2 window with a
// flag when no window has positive slope.
inline MleEstimate auto_fit(const StretchingCurve& curve, int window_len) {
  if (window_len < 3) throw std::invalid_argument("auto_fit: window_len must be >= 3");
  if (window_len > curve.max_delta_n)
    throw std::invalid_argument("auto_fit: curve shorter than window_len");

  int best_k1 = -1;
  detail::LineFit best;
  int best_pos_k1 = -1;
  detail::LineFit best_pos;
  for (int k1 = 1; k1 + window_len - 1 <= curve.max_delta_n; ++k1) {
    const auto fit = detail::ols_fit(curve.s, k1, k1 + window_len - 1);
    if (best_k1 < 0 || fit.r_squared > best.r_squared) {
      best = fit;
      best_k1 = k1;
    }
    if (fit.slope > 0.0 && (best_pos_k1 < 0 || fit.r_squared > best_pos.r_squared)) {
      best_pos = fit;
      best_pos_k1 = k1;
    }
  }
  const bool have_positive = best_pos_k1 >= 0;
  const int k1 = have_positive ? best_pos_k1 : best_k1;
  MleEstimate est = fit_slope(curve, k1, k1 + window_len - 1);
  est.non_positive_slope = !have_positive;
  return est;
}

}  // namespace chaoskit

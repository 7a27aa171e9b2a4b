#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chaoskit/embedding.hpp"
#include "chaoskit/neighbors.hpp"
#include "chaoskit/parallel.hpp"

namespace chaoskit {

struct FnnRecord {
  int m = 0;
  int theiler = 0;
  long long numerator = 0;
  long long denominator = 0;
  long long ties = 0;                 // zero-distance nearest neighbours, skipped
  std::optional<double> fraction;     // empty when denominator == 0
};

struct FnnCurve {
  std::vector<FnnRecord> records;
  double r = 0.0;
  double sigma = 0.0;
  int tau = 1;
};

// Fraction of false nearest neighbours when going from dimension m to m+1.
//
// Points are restricted to the first n - m*tau embedding vectors so every
// point and its neighbour have an (m+1)-dimensional image. For each point the
// nearest neighbour under the max norm (|i-k| > theiler) enters the
// denominator iff its m-dimensional distance is below sigma/r, and the
// numerator iff additionally the (m+1)-dimensional distance exceeds r times
// the m-dimensional one. Exact-tie pairs (zero distance) are skipped and
// counted separately: the distance ratio is undefined at zero.
inline FnnRecord fnn_fraction(const ReturnSeries& z, int m, int tau, double r, double sigma,
                              int theiler, unsigned threads = 1) {
  if (!(r > 1.0)) throw std::invalid_argument("fnn_fraction: r must be > 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("fnn_fraction: sigma must be > 0");
  if (tau < 1) throw std::invalid_argument("fnn_fraction: tau must be >= 1");
  const std::size_t n = z.size();
  const std::size_t span = static_cast<std::size_t>(m) * static_cast<std::size_t>(tau);
  if (span + 2 > n)
    throw std::invalid_argument("fnn_fraction: series too short for dimensions m and m+1");
  const std::size_t count = n - span;  // points with an (m+1)-dimensional image

  const DelayEmbedding e = embed(z, {tau, m});
  const NeighborIndex index(e, count);
  const double cutoff = sigma / r;
  const double* values = e.series().data();

  // 0 = no contribution, 1 = denominator only, 2 = denominator + numerator,
  // 3 = zero-distance tie.
  std::vector<std::uint8_t> slot(count, 0);
  parallel_for(count, threads, [&](std::size_t i) {
    const auto cands = index.within(i, cutoff, theiler);
    if (cands.empty()) return;
    const Neighbor* best = &cands.front();
    for (const auto& c : cands) {
      if (c.distance < best->distance) best = &c;
    }
    const double dm = best->distance;
    if (dm == 0.0) {
      slot[i] = 3;
      return;
    }
    if (!(dm < cutoff)) return;
    const double extra =
        std::abs(values[i + span] - values[best->index + span]);
    slot[i] = extra > r * dm ? 2 : 1;
  });

  FnnRecord rec;
  rec.m = m;
  rec.theiler = theiler;
  for (std::size_t i = 0; i < count; ++i) {
    switch (slot[i]) {
      case 1: ++rec.denominator; break;
      case 2: ++rec.denominator; ++rec.numerator; break;
      case 3: ++rec.ties; break;
      default: break;
    }
  }
  if (rec.denominator > 0)
    rec.fraction = static_cast<double>(rec.numerator) / static_cast<double>(rec.denominator);
  return rec;
}

struct MinDimResult {
  int m_min = 0;
  bool converged = false;
  FnnCurve curve;
};

// Smallest m <= m_max whose defined FNN fraction drops below fnn_star.
// theiler < 0 selects the (m-1)*tau default per dimension.
inline MinDimResult min_embedding_dim(const ReturnSeries& z, int tau, double r, double sigma,
                                      int theiler, double fnn_star, int m_max,
                                      unsigned threads = 1) {
  if (m_max < 1) throw std::invalid_argument("min_embedding_dim: m_max must be >= 1");
  MinDimResult out;
  out.curve.r = r;
  out.curve.sigma = sigma;
  out.curve.tau = tau;
  for (int m = 1; m <= m_max; ++m) {
    const std::size_t span = static_cast<std::size_t>(m) * static_cast<std::size_t>(tau);
    if (span + 2 > z.size()) break;  // m+1 no longer constructible
    const int tw = theiler >= 0 ? theiler : (m - 1) * tau;
    const FnnRecord rec = fnn_fraction(z, m, tau, r, sigma, tw, threads);
    out.curve.records.push_back(rec);
    if (rec.fraction.has_value() && *rec.fraction < fnn_star) {
      out.m_min = m;
      out.converged = true;
      return out;
    }
  }
  out.m_min = m_max;
  out.converged = false;
  return out;
}

}  // namespace chaoskit

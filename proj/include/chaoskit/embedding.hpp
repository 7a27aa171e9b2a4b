#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaoskit/series.hpp"

namespace chaoskit {

struct EmbeddingParams {
  int tau = 1;  // delay, in observation steps
  int m = 1;    // embedding dimension
};

// Delay-coordinate reconstruction: vector i has components z_{i + j*tau},
// j = 0..m-1. Coordinates are read straight from the scalar series, so they
// are exact by construction.
class DelayEmbedding {
 public:
  DelayEmbedding(std::vector<double> values, EmbeddingParams params, std::string label = {})
      : values_(std::move(values)), params_(params), label_(std::move(label)) {
    if (params_.tau < 1) throw std::invalid_argument("embed: tau must be >= 1");
    if (params_.m < 1) throw std::invalid_argument("embed: m must be >= 1");
    const std::size_t span =
        static_cast<std::size_t>(params_.m - 1) * static_cast<std::size_t>(params_.tau);
    if (span >= values_.size())
      throw std::invalid_argument("embed: (m-1)*tau must be smaller than the series length");
    count_ = values_.size() - span;
  }

  const EmbeddingParams& params() const { return params_; }
  int dim() const { return params_.m; }
  int tau() const { return params_.tau; }
  std::size_t size() const { return count_; }
  const std::string& label() const { return label_; }
  const std::vector<double>& series() const { return values_; }

  double coord(std::size_t i, int j) const {
    return values_[i + static_cast<std::size_t>(j) * static_cast<std::size_t>(params_.tau)];
  }

  // Max-norm distance restricted to the first `dims` coordinates.
  double distance(std::size_t i, std::size_t k, int dims) const {
    double d = 0.0;
    for (int j = 0; j < dims; ++j) {
      const double diff = std::abs(coord(i, j) - coord(k, j));
      if (diff > d) d = diff;
    }
    return d;
  }

  double max_distance(std::size_t i, std::size_t k) const { return distance(i, k, params_.m); }

  double euclidean_distance(std::size_t i, std::size_t k) const {
    double ss = 0.0;
    for (int j = 0; j < params_.m; ++j) {
      const double diff = coord(i, j) - coord(k, j);
      ss += diff * diff;
    }
    return std::sqrt(ss);
  }

 private:
  std::vector<double> values_;
  EmbeddingParams params_;
  std::string label_;
  std::size_t count_ = 0;
};

inline DelayEmbedding embed(const ReturnSeries& z, EmbeddingParams params) {
  return DelayEmbedding(z.values, params, z.label);
}

enum class LagMethod { autocorr_1e, autocorr_zero, fixed };

inline const char* to_string(LagMethod m) {
  switch (m) {
    case LagMethod::autocorr_1e: return "autocorrelation-1/e";
    case LagMethod::autocorr_zero: return "autocorrelation-zero";
    case LagMethod::fixed: return "fixed";
  }
  return "?";
}

struct LagEstimate {
  LagMethod method = LagMethod::autocorr_1e;
  int tau = 1;
  bool fallback = false;          // no lag up to n/10 qualified; tau forced to 1
  std::vector<double> acf;        // acf[L-1] = autocorrelation at lag L
};

// Sample autocorrelation at lags 1..max_lag.
inline std::vector<double> autocorrelation(const std::vector<double>& z, int max_lag) {
  const std::size_t n = z.size();
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : z) denom += (v - mean) * (v - mean);
  if (denom == 0.0) throw std::invalid_argument("autocorrelation: constant series");
  std::vector<double> acf(static_cast<std::size_t>(max_lag));
  for (int lag = 1; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < n; ++t) {
      s += (z[t] - mean) * (z[t + static_cast<std::size_t>(lag)] - mean);
    }
    acf[static_cast<std::size_t>(lag - 1)] = s / denom;
  }
  return acf;
}

inline LagEstimate estimate_lag(const ReturnSeries& z, LagMethod method, int fixed_tau = 1) {
  LagEstimate out;
  out.method = method;
  if (method == LagMethod::fixed) {
    if (fixed_tau < 1) throw std::invalid_argument("estimate_lag: fixed tau must be >= 1");
    out.tau = fixed_tau;
    return out;
  }
  if (z.size() < 10) throw std::invalid_argument("estimate_lag: need at least 10 observations");
  const int max_lag = std::max(1, static_cast<int>(z.size() / 10));
  out.acf = autocorrelation(z.values, max_lag);
  const double threshold = 1.0 / std::exp(1.0);
  for (int lag = 1; lag <= max_lag; ++lag) {
    const double a = out.acf[static_cast<std::size_t>(lag - 1)];
    const bool hit =
        method == LagMethod::autocorr_1e ? (a < threshold) : (a <= 0.0);
    if (hit) {
      out.tau = lag;
      return out;
    }
  }
  out.tau = 1;
  out.fallback = true;
  return out;
}

}  // namespace chaoskit

// Shared helpers for the test suites: independent reference implementations
// (kept free of the library's acceleration structures), random input
// generators, the randomized property checks required by the acceptance
// suite, and a small CLI runner.

#pragma once

#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "chaoskit/chaoskit.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// independent reference implementations
// ---------------------------------------------------------------------------

struct FnnCounts {
  long long numerator = 0;
  long long denominator = 0;
  long long ties = 0;
};

// O(n^2) false-nearest-neighbour counter working straight off the scalar
// series: no spatial index, no shared code with the library's FNN path.
inline FnnCounts fnn_brute_force(const std::vector<double>& z, int m, int tau, double r,
                                 double sigma, int theiler) {
  const std::size_t span = static_cast<std::size_t>(m) * static_cast<std::size_t>(tau);
  const std::size_t count = z.size() - span;
  const double cutoff = sigma / r;
  FnnCounts out;
  for (std::size_t i = 0; i < count; ++i) {
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_k = count;
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t gap = i > k ? i - k : k - i;
      if (gap <= static_cast<std::size_t>(theiler)) continue;
      double d = 0.0;
      for (int j = 0; j < m; ++j) {
        const double diff = std::abs(z[i + static_cast<std::size_t>(j * tau)] -
                                     z[k + static_cast<std::size_t>(j * tau)]);
        if (diff > d) d = diff;
      }
      if (d < best_d || (d == best_d && k < best_k)) {
        best_d = d;
        best_k = k;
      }
    }
    if (best_k == count) continue;
    if (best_d == 0.0) {
      ++out.ties;
      continue;
    }
    if (!(best_d < cutoff)) continue;
    ++out.denominator;
    if (std::abs(z[i + span] - z[best_k + span]) > r * best_d) ++out.numerator;
  }
  return out;
}

// Direct autocorrelation, written independently of the library's version.
inline double acf_reference(const std::vector<double>& z, int lag) {
  const std::size_t n = z.size();
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < n; ++t) den += (z[t] - mean) * (z[t] - mean);
  for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < n; ++t)
    num += (z[t] - mean) * (z[t + static_cast<std::size_t>(lag)] - mean);
  return num / den;
}

// Straightforward re-derivation of the determinism coefficient used to
// cross-check the library: separate grid code, separate grouping (sorted
// flat keys instead of a map of bin tuples).
inline double kappa_reference(const chaoskit::PointMatrix& p, int bins, int n_min) {
  const int d = p.dim;
  std::vector<double> lo(static_cast<std::size_t>(d)), w(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    double mn = p.at(0, j), mx = p.at(0, j);
    for (std::size_t i = 1; i < p.n; ++i) {
      mn = std::min(mn, p.at(i, j));
      mx = std::max(mx, p.at(i, j));
    }
    lo[static_cast<std::size_t>(j)] = mn;
    w[static_cast<std::size_t>(j)] = (mx - mn) / bins;
  }
  auto key_of = [&](std::size_t i) {
    std::string key;
    for (int j = 0; j < d; ++j) {
      int b = static_cast<int>((p.at(i, j) - lo[static_cast<std::size_t>(j)]) /
                               w[static_cast<std::size_t>(j)]);
      b = std::min(std::max(b, 0), bins - 1);
      key += std::to_string(b);
      key += '/';
    }
    return key;
  };

  struct Acc {
    std::size_t n = 0;
    std::vector<double> sum;
  };
  std::map<std::string, Acc> boxes;
  std::size_t i = 0;
  while (i < p.n) {
    const std::string key = key_of(i);
    std::size_t j = i;
    while (j + 1 < p.n && key_of(j + 1) == key) ++j;
    const std::size_t exit = j + 1;
    if (exit >= p.n) break;
    std::vector<double> v(static_cast<std::size_t>(d));
    double ss = 0.0;
    for (int c = 0; c < d; ++c) {
      v[static_cast<std::size_t>(c)] = p.at(exit, c) - p.at(i, c);
      ss += v[static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(c)];
    }
    const double norm = std::sqrt(ss);
    if (norm > 0.0) {
      auto& acc = boxes[key];
      if (acc.sum.empty()) acc.sum.assign(static_cast<std::size_t>(d), 0.0);
      for (int c = 0; c < d; ++c) acc.sum[static_cast<std::size_t>(c)] += v[static_cast<std::size_t>(c)] / norm;
      ++acc.n;
    }
    i = exit;
  }

  double weight = 0.0, sum = 0.0;
  for (const auto& [key, acc] : boxes) {
    if (acc.n < static_cast<std::size_t>(n_min)) continue;
    double vv = 0.0;
    for (double c : acc.sum) vv += (c / acc.n) * (c / acc.n);
    const double b = 1.0 / static_cast<double>(acc.n);
    const double score = (vv - b) / (1.0 - b);
    sum += acc.n * std::clamp(score, 0.0, 1.0);
    weight += acc.n;
  }
  return sum / weight;
}

// ---------------------------------------------------------------------------
// input generators
// ---------------------------------------------------------------------------

inline std::vector<double> ar1_series(chaoskit::Rng& rng, std::size_t n, double phi, double sd) {
  std::vector<double> z(n);
  double x = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    x = phi * x + sd * rng.normal();
    z[t] = x;
  }
  return z;
}

inline std::vector<double> random_walk_points(chaoskit::Rng& rng, std::size_t n, int dim) {
  std::vector<double> data(n * static_cast<std::size_t>(dim));
  std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      x[static_cast<std::size_t>(j)] += rng.normal();
      data[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)] =
          x[static_cast<std::size_t>(j)];
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// randomized property checks (shared between module tests and acceptance)
// ---------------------------------------------------------------------------

// Scaling all prices by c > 0 leaves the log returns unchanged up to
// floating rounding.
inline void check_price_scaling(int cases) {
  for (int cs = 0; cs < cases; ++cs) {
    chaoskit::Rng rng(1000 + static_cast<std::uint64_t>(cs));
    const std::size_t n = 50 + static_cast<std::size_t>(rng.uniform01() * 250);
    chaoskit::PriceSeries a;
    a.label = "case";
    double price = 20.0 + 200.0 * rng.uniform01();
    for (std::size_t t = 0; t < n; ++t) {
      a.dates.push_back({2000 + static_cast<int>(t / 360), 1 + static_cast<int>((t / 30) % 12),
                         1 + static_cast<int>(t % 28)});
      a.prices.push_back(price);
      price *= std::exp(0.05 * rng.normal());
    }
    const double c = std::exp(-3.0 + 6.0 * rng.uniform01());
    chaoskit::PriceSeries b = a;
    for (auto& pv : b.prices) pv *= c;

    const auto ra = chaoskit::log_returns(a);
    const auto rb = chaoskit::log_returns(b);
    ASSERT_EQ(ra.values.size(), rb.values.size());
    for (std::size_t t = 0; t < ra.values.size(); ++t) {
      ASSERT_NEAR(ra.values[t], rb.values[t], 1e-15) << "case " << cs << " index " << t;
    }
  }
}

// FNN counts are invariant under adding a constant and under scaling by
// c > 0 with sigma recomputed from the scaled series.
inline void check_fnn_scale_covariance(int cases) {
  for (int cs = 0; cs < cases; ++cs) {
    chaoskit::Rng rng(2000 + static_cast<std::uint64_t>(cs));
    const std::size_t n = 300 + static_cast<std::size_t>(rng.uniform01() * 700);
    const int m = 1 + static_cast<int>(rng.uniform01() * 3.0);
    const int tau = 1 + static_cast<int>(rng.uniform01() * 2.0);
    const int theiler = (m - 1) * tau;
    const auto base = ar1_series(rng, n, 0.5, 1.0);
    const double shift = -5.0 + 10.0 * rng.uniform01();
    const double scale = std::exp(-2.0 + 4.0 * rng.uniform01());

    auto shifted = base;
    for (auto& v : shifted) v += shift;
    auto scaled = base;
    for (auto& v : scaled) v *= scale;

    const auto z0 = chaoskit::make_return_series(base, "base");
    const auto z1 = chaoskit::make_return_series(shifted, "shifted");
    const auto z2 = chaoskit::make_return_series(scaled, "scaled");

    const auto r0 = chaoskit::fnn_fraction(z0, m, tau, 10.0, z0.sigma, theiler);
    const auto r1 = chaoskit::fnn_fraction(z1, m, tau, 10.0, z1.sigma, theiler);
    const auto r2 = chaoskit::fnn_fraction(z2, m, tau, 10.0, z2.sigma, theiler);

    ASSERT_EQ(r0.numerator, r1.numerator) << "case " << cs;
    ASSERT_EQ(r0.denominator, r1.denominator) << "case " << cs;
    ASSERT_EQ(r0.ties, r1.ties) << "case " << cs;
    ASSERT_EQ(r0.numerator, r2.numerator) << "case " << cs;
    ASSERT_EQ(r0.denominator, r2.denominator) << "case " << cs;
    ASSERT_EQ(r0.ties, r2.ties) << "case " << cs;
    if (r0.fraction) {
      ASSERT_TRUE(r1.fraction && r2.fraction);
      ASSERT_EQ(*r0.fraction, *r1.fraction);
      ASSERT_EQ(*r0.fraction, *r2.fraction);
      ASSERT_GE(*r0.fraction, 0.0);
      ASSERT_LE(*r0.fraction, 1.0);
    }
  }
}

// Adding a constant leaves the stretching curve unchanged; scaling the
// series by a power of two (exact in floating point) and eps along with it
// shifts s by ln c and leaves fitted slopes unchanged.
inline void check_stretching_affine(int cases) {
  for (int cs = 0; cs < cases; ++cs) {
    chaoskit::Rng rng(3000 + static_cast<std::uint64_t>(cs));
    const std::size_t n = 400 + static_cast<std::size_t>(rng.uniform01() * 500);
    const int m = 1 + static_cast<int>(rng.uniform01() * 2.0);
    const int theiler = m - 1;
    std::vector<double> base;
    if (rng.uniform01() < 0.5) {
      base = ar1_series(rng, n, 0.2 + 0.6 * rng.uniform01(), 1.0);
    } else {
      chaoskit::MapSpec spec;
      spec.params = chaoskit::HenonParams{1.4, 0.3, 0.0, 0.0};
      spec.length = n;
      spec.transient = 500;
      base = chaoskit::generate(spec);
    }
    const auto z0 = chaoskit::make_return_series(base, "base");
    const double eps = 0.3 * z0.sigma;
    const int max_dn = 10;

    const auto e0 = chaoskit::embed(z0, {1, m});
    const auto c0 = chaoskit::stretching_factor(e0, eps, theiler, max_dn, 1);

    // shift
    const double shift = -4.0 + 8.0 * rng.uniform01();
    auto shifted = base;
    for (auto& v : shifted) v += shift;
    const auto e1 = chaoskit::embed(chaoskit::make_return_series(shifted, "shift"), {1, m});
    const auto c1 = chaoskit::stretching_factor(e1, eps, theiler, max_dn, 1);
    ASSERT_EQ(c0.reference_count, c1.reference_count) << "case " << cs;
    for (std::size_t dn = 0; dn < c0.s.size(); ++dn) {
      // identical up to the rounding of z + shift itself
      ASSERT_NEAR(c0.s[dn], c1.s[dn], 1e-12) << "case " << cs << " dn " << dn;
    }

    // scale by a power of two
    const int pow2 = -5 + static_cast<int>(rng.uniform01() * 11.0);
    const double c = std::ldexp(1.0, pow2 == 0 ? 1 : pow2);
    auto scaled = base;
    for (auto& v : scaled) v *= c;
    const auto e2 = chaoskit::embed(chaoskit::make_return_series(scaled, "scale"), {1, m});
    const auto c2 = chaoskit::stretching_factor(e2, eps * c, theiler, max_dn, 1);
    ASSERT_EQ(c0.reference_count, c2.reference_count) << "case " << cs;
    const double lc = std::log(c);
    for (std::size_t dn = 0; dn < c0.s.size(); ++dn) {
      ASSERT_NEAR(c2.s[dn] - c0.s[dn], lc, 1e-9) << "case " << cs << " dn " << dn;
    }
    const auto f0 = chaoskit::fit_slope(c0, 0, max_dn);
    const auto f2 = chaoskit::fit_slope(c2, 0, max_dn);
    ASSERT_NEAR(f0.lambda, f2.lambda, 1e-12) << "case " << cs;
  }
}

// Translating all points or permuting axes leaves pass counts exactly equal
// and kappa equal within 1e-12.
inline void check_kappa_rigid_motion(int cases) {
  for (int cs = 0; cs < cases; ++cs) {
    chaoskit::Rng rng(4000 + static_cast<std::uint64_t>(cs));
    const std::size_t n = 300 + static_cast<std::size_t>(rng.uniform01() * 500);
    const int dim = 2 + static_cast<int>(rng.uniform01() * 2.0);
    const int bins = rng.uniform01() < 0.5 ? 5 : 10;

    chaoskit::PointMatrix p;
    p.n = n;
    p.dim = dim;
    p.data = random_walk_points(rng, n, dim);
    const auto base = chaoskit::determinism_test(p, bins, 2);

    chaoskit::PointMatrix moved = p;
    std::vector<double> t(static_cast<std::size_t>(dim));
    for (auto& v : t) v = -10.0 + 20.0 * rng.uniform01();
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j) moved.at(i, j) += t[static_cast<std::size_t>(j)];
    }
    const auto shifted = chaoskit::determinism_test(moved, bins, 2);
    ASSERT_EQ(base.passes_total, shifted.passes_total) << "case " << cs;
    ASSERT_EQ(base.boxes_used, shifted.boxes_used) << "case " << cs;
    ASSERT_NEAR(base.kappa, shifted.kappa, 1e-12) << "case " << cs;

    chaoskit::PointMatrix permuted = p;
    std::vector<int> perm(static_cast<std::size_t>(dim));
    std::iota(perm.begin(), perm.end(), 0);
    for (int j = dim - 1; j > 0; --j) {
      const int k = static_cast<int>(rng.uniform01() * (j + 1));
      std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(k)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j)
        permuted.at(i, j) = p.at(i, perm[static_cast<std::size_t>(j)]);
    }
    const auto permres = chaoskit::determinism_test(permuted, bins, 2);
    ASSERT_EQ(base.passes_total, permres.passes_total) << "case " << cs;
    ASSERT_EQ(base.boxes_used, permres.boxes_used) << "case " << cs;
    ASSERT_NEAR(base.kappa, permres.kappa, 1e-12) << "case " << cs;
  }
}

// ---------------------------------------------------------------------------
// filesystem + CLI helpers
// ---------------------------------------------------------------------------

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("chaoskit_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout
};

#ifdef CHAOSKIT_BIN
inline CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CHAOSKIT_BIN) + " " + args + " 2>/dev/null";
  CliResult res;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return res;
  char buf[4096];
  std::size_t got;
  while ((got = ::fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, got);
  const int status = ::pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}
#endif

}  // namespace testsupport

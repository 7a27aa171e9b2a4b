#pragma once

#include <future>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaoskit/determinism.hpp"
#include "chaoskit/embedding.hpp"
#include "chaoskit/fnn.hpp"
#include "chaoskit/io.hpp"
#include "chaoskit/lyapunov.hpp"
#include "chaoskit/series.hpp"

namespace chaoskit {

// Every knob of the ingest -> lag -> FNN -> MLE -> kappa chain. Defaults
// match the documented per-stage defaults; zero/negative sentinels mean
// "derive from the data" and the derived value is reported back.
struct AnalysisOptions {
  // lag
  LagMethod lag_method = LagMethod::autocorr_1e;
  int tau = 0;  // > 0 pins the delay and skips estimation

  // false nearest neighbours
  double fnn_r = 10.0;
  double fnn_sigma = 0.0;  // <= 0: population std of the series
  double fnn_star = 0.005;
  int m_max = 30;
  int theiler = -1;  // < 0: (m-1)*tau

  // maximal Lyapunov exponent
  double eps = 0.0;         // > 0 pins the radius; else escalate from eps_factor*sigma
  double eps_factor = 0.1;
  int min_neighbors = 1;
  int max_delta_n = 40;
  int fit_window = 8;
  Norm norm = Norm::max;

  // determinism coefficient
  int kappa_bins = 25;
  int kappa_n_min = 2;
  bool projection_2d = false;

  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SeriesResult {
  std::string name;
  std::size_t n = 0;

  int tau = 0;
  bool lag_fallback = false;

  int m = 0;
  bool fnn_converged = false;
  FnnCurve fnn_curve;

  std::optional<MleEstimate> mle;
  double eps_used = 0.0;

  std::optional<DeterminismResult> determinism;
  std::vector<BoxRow> boxes;  // filled on request

  std::vector<std::string> flags;
  std::string error;  // non-empty: the series failed before producing results

  bool ok() const { return error.empty(); }
};

inline SeriesResult analyze_series(const ReturnSeries& z, const AnalysisOptions& opts,
                                   bool collect_boxes = false, unsigned threads = 1) {
  SeriesResult res;
  res.name = z.label;
  res.n = z.size();
  try {
    // delay
    if (opts.tau > 0) {
      res.tau = opts.tau;
    } else {
      const auto lag = estimate_lag(z, opts.lag_method);
      res.tau = lag.tau;
      res.lag_fallback = lag.fallback;
      if (lag.fallback) res.flags.push_back("lag-fallback");
    }

    // embedding dimension
    const double sigma = opts.fnn_sigma > 0.0 ? opts.fnn_sigma : z.sigma;
    const auto dim = min_embedding_dim(z, res.tau, opts.fnn_r, sigma, opts.theiler, opts.fnn_star,
                                       opts.m_max, threads);
    res.m = dim.m_min;
    res.fnn_converged = dim.converged;
    res.fnn_curve = dim.curve;
    if (!dim.converged) res.flags.push_back("fnn-not-converged");

    const DelayEmbedding e = embed(z, {res.tau, res.m});
    const int theiler = opts.theiler >= 0 ? opts.theiler : (res.m - 1) * res.tau;

    // maximal Lyapunov exponent
    try {
      StretchingCurve curve =
          opts.eps > 0.0
              ? stretching_factor(e, opts.eps, theiler, opts.max_delta_n, opts.min_neighbors,
                                  opts.norm, threads)
              : stretching_factor_auto_eps(e, z.sigma, theiler, opts.max_delta_n,
                                           opts.min_neighbors, opts.eps_factor, opts.norm,
                                           threads);
      res.eps_used = curve.eps;
      res.mle = auto_fit(curve, opts.fit_window);
      if (res.mle->non_positive_slope) res.flags.push_back("non-positive-slope");
      if (!res.mle->r2_defined) res.flags.push_back("r2-undefined");
    } catch (const std::exception& ex) {
      res.flags.push_back(std::string("mle-failed: ") + ex.what());
    }

    // determinism coefficient
    try {
      VectorField field;
      res.determinism = determinism_test(e, opts.kappa_bins, opts.kappa_n_min, opts.projection_2d,
                                         collect_boxes ? &field : nullptr);
      if (collect_boxes) res.boxes = box_table(field, opts.kappa_n_min);
    } catch (const std::exception& ex) {
      res.flags.push_back(std::string("kappa-failed: ") + ex.what());
    }
  } catch (const std::exception& ex) {
    res.error = ex.what();
  }
  return res;
}

// Series are analyzed independently (concurrently when allowed) and merged
// back in input order, so the report does not depend on scheduling.
inline std::vector<SeriesResult> analyze_all(const std::vector<ReturnSeries>& series,
                                             const AnalysisOptions& opts,
                                             bool collect_boxes = false) {
  std::vector<SeriesResult> results(series.size());
  const unsigned threads = effective_threads(opts.threads);
  if (threads <= 1 || series.size() <= 1) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      results[i] = analyze_series(series[i], opts, collect_boxes, threads);
    }
    return results;
  }
  std::vector<std::future<SeriesResult>> futures;
  futures.reserve(series.size());
  for (const auto& z : series) {
    futures.push_back(std::async(std::launch::async, [&z, &opts, collect_boxes] {
      return analyze_series(z, opts, collect_boxes, 1);
    }));
  }
  for (std::size_t i = 0; i < series.size(); ++i) results[i] = futures[i].get();
  return results;
}

inline nlohmann::json to_json(const AnalysisOptions& o) {
  nlohmann::json j;
  j["lag_method"] = to_string(o.lag_method);
  j["tau"] = o.tau;
  j["fnn_r"] = o.fnn_r;
  j["fnn_sigma"] = o.fnn_sigma;
  j["fnn_star"] = o.fnn_star;
  j["m_max"] = o.m_max;
  j["theiler"] = o.theiler;
  j["eps"] = o.eps;
  j["eps_factor"] = o.eps_factor;
  j["min_neighbors"] = o.min_neighbors;
  j["max_delta_n"] = o.max_delta_n;
  j["fit_window"] = o.fit_window;
  j["norm"] = to_string(o.norm);
  j["kappa_bins"] = o.kappa_bins;
  j["kappa_n_min"] = o.kappa_n_min;
  j["projection_2d"] = o.projection_2d;
  return j;
}

inline std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

// Merged summary table: one row per series with delay, dimension, exponent
// and determinism coefficient.
inline void write_report_csv(const std::string& path, const std::vector<SeriesResult>& results) {
  auto out = open_for_write(path);
  out << "name,n,tau,m,lambda,r_squared,kappa,flags\n";
  for (const auto& r : results) {
    out << r.name << ',' << r.n << ',';
    if (r.ok()) {
      out << r.tau << ',' << r.m << ','
          << (r.mle ? format_double(r.mle->lambda) : "") << ','
          << (r.mle ? format_double(r.mle->r_squared) : "") << ','
          << (r.determinism ? format_double(r.determinism->kappa) : "") << ','
          << join_flags(r.flags) << '\n';
    } else {
      out << ",,,,," << "error: " << r.error << '\n';
    }
  }
}

struct LambdaRatio {
  std::string numerator;
  std::string denominator;
  double value = 0.0;
};

inline nlohmann::json series_to_json(const SeriesResult& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["n"] = r.n;
  if (!r.ok()) {
    j["error"] = r.error;
    return j;
  }
  j["tau"] = r.tau;
  j["m"] = r.m;
  j["fnn_converged"] = r.fnn_converged;
  if (r.mle) {
    j["lambda"] = r.mle->lambda;
    j["r_squared"] = r.mle->r_squared;
    j["fit_range"] = {r.mle->k1, r.mle->k2};
    j["eps_used"] = r.eps_used;
    j["mle_references"] = r.mle->curve.reference_count;
  }
  if (r.determinism) {
    const auto& d = *r.determinism;
    j["kappa"] = d.kappa;
    j["kappa_raw"] = d.kappa_raw;
    j["kappa_boxes_used"] = d.boxes_used;
    j["kappa_boxes_occupied"] = d.boxes_occupied;
    j["kappa_passes"] = d.passes_total;
    j["kappa_dims"] = d.dims;
    j["kappa_projected"] = d.projected;
  }
  j["flags"] = r.flags;
  return j;
}

// JSON report embeds the full effective configuration: every parameter that
// shaped the numbers is recorded next to them.
inline void write_report_json(const std::string& path, const std::vector<SeriesResult>& results,
                              const AnalysisOptions& opts,
                              const std::optional<LambdaRatio>& ratio = std::nullopt) {
  nlohmann::json j;
  j["effective_config"] = to_json(opts);
  j["series"] = nlohmann::json::array();
  for (const auto& r : results) j["series"].push_back(series_to_json(r));
  if (ratio) {
    j["lambda_ratio"] = {{"numerator", ratio->numerator},
                         {"denominator", ratio->denominator},
                         {"value", ratio->value}};
  }
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
}

}  // namespace chaoskit

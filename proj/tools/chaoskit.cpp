// chaoskit: nonlinear time-series analysis for scalar series.
//
// Subcommands: pipeline (ingest -> lag -> FNN -> MLE -> kappa with report
// files), plus single-stage access (lag, fnn, mle, determinism) and a
// synthetic series generator (synth).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chaoskit/chaoskit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAllFailed = 2;
constexpr int kExitPartial = 3;

struct IngestOptions {
  std::vector<std::string> inputs;
  std::string kind = "prices";  // prices | values
  std::string date_column = "date";
  std::string price_column = "price";
  std::string value_column = "value";
  bool day_first = false;
};

void add_ingest_options(CLI::App* cmd, IngestOptions& opts, bool multiple) {
  auto* input = cmd->add_option("-i,--input", opts.inputs, "Input CSV file(s)")->required();
  if (!multiple) input->expected(1);
  cmd->add_option("--series-kind", opts.kind, "Input kind: prices (log returns taken) or values")
      ->check(CLI::IsMember({"prices", "values"}))
      ->capture_default_str();
  cmd->add_option("--date-column", opts.date_column, "Date column name (prices input)")
      ->capture_default_str();
  cmd->add_option("--price-column", opts.price_column, "Price column name (prices input)")
      ->capture_default_str();
  cmd->add_option("--value-column", opts.value_column, "Value column name (values input)")
      ->capture_default_str();
  cmd->add_flag("--day-first", opts.day_first, "Parse dates as day-month-year");
}

std::string label_of(const std::string& path) { return fs::path(path).stem().string(); }

chaoskit::ReturnSeries load_one(const std::string& path, const IngestOptions& opts) {
  if (opts.kind == "values") {
    auto series = chaoskit::load_value_series(path, opts.value_column, label_of(path));
    std::fprintf(stderr, "loaded %s: %zu values\n", path.c_str(), series.size());
    return series;
  }
  chaoskit::CsvSchema schema{opts.date_column, opts.price_column, opts.day_first};
  auto loaded = chaoskit::load_csv(path, schema, label_of(path));
  std::fprintf(stderr, "loaded %s: %zu prices, %zu rows rejected\n", path.c_str(),
               loaded.series.size(), loaded.rejected_rows);
  return chaoskit::log_returns(loaded.series);
}

std::vector<chaoskit::ReturnSeries> load_inputs(const IngestOptions& opts) {
  std::vector<chaoskit::ReturnSeries> series;
  for (const auto& path : opts.inputs) series.push_back(load_one(path, opts));
  return series;
}

chaoskit::LagMethod parse_lag_method(const std::string& name) {
  if (name == "acf-1e") return chaoskit::LagMethod::autocorr_1e;
  if (name == "acf-zero") return chaoskit::LagMethod::autocorr_zero;
  return chaoskit::LagMethod::fixed;
}

void add_analysis_options(CLI::App* cmd, chaoskit::AnalysisOptions& a, std::string& lag_method,
                          std::string& norm) {
  cmd->add_option("--lag-method", lag_method, "Delay selection: acf-1e, acf-zero or fixed")
      ->check(CLI::IsMember({"acf-1e", "acf-zero", "fixed"}))
      ->capture_default_str();
  cmd->add_option("--tau", a.tau, "Delay override (> 0 skips estimation)")->capture_default_str();
  cmd->add_option("--fnn-r", a.fnn_r, "FNN distance-ratio threshold")->capture_default_str();
  cmd->add_option("--fnn-sigma", a.fnn_sigma, "FNN scale cutoff (0 = series std)")
      ->capture_default_str();
  cmd->add_option("--fnn-star", a.fnn_star, "FNN convergence threshold")->capture_default_str();
  cmd->add_option("--m-max", a.m_max, "Largest embedding dimension tried")->capture_default_str();
  cmd->add_option("--theiler", a.theiler, "Temporal exclusion window (-1 = (m-1)*tau)")
      ->capture_default_str();
  cmd->add_option("--eps", a.eps, "Initial-neighbourhood radius (0 = auto escalation)")
      ->capture_default_str();
  cmd->add_option("--eps-factor", a.eps_factor, "Auto radius start, as a fraction of sigma")
      ->capture_default_str();
  cmd->add_option("--min-neighbors", a.min_neighbors, "Minimum neighbours per reference")
      ->capture_default_str();
  cmd->add_option("--max-delta-n", a.max_delta_n, "Stretching-curve horizon (steps)")
      ->capture_default_str();
  cmd->add_option("--fit-window", a.fit_window, "Sliding fit-window length")
      ->capture_default_str();
  cmd->add_option("--norm", norm, "Divergence norm: max or euclidean")
      ->check(CLI::IsMember({"max", "euclidean"}))
      ->capture_default_str();
  cmd->add_option("--kappa-bins", a.kappa_bins, "Grid bins per axis")->capture_default_str();
  cmd->add_option("--kappa-n-min", a.kappa_n_min, "Minimum passes per counted box")
      ->capture_default_str();
  cmd->add_flag("--projection-2d", a.projection_2d,
                "Coarse grain only the first two delay coordinates");
  cmd->add_option("--threads", a.threads, "Worker threads (0 = hardware)")->capture_default_str();
}

int run_pipeline(const IngestOptions& ingest, chaoskit::AnalysisOptions opts,
                 const std::string& lag_method, const std::string& norm,
                 const std::string& out_dir, const std::string& format, bool boxes_dump,
                 const std::string& lambda_ratio) {
  opts.lag_method = parse_lag_method(lag_method);
  if (opts.lag_method == chaoskit::LagMethod::fixed && opts.tau <= 0) opts.tau = 1;
  opts.norm = norm == "euclidean" ? chaoskit::Norm::euclidean : chaoskit::Norm::max;

  // a file that fails to load is a failed series, not a config error
  std::vector<chaoskit::SeriesResult> results(ingest.inputs.size());
  std::vector<chaoskit::ReturnSeries> loaded;
  std::vector<std::size_t> loaded_at;
  for (std::size_t i = 0; i < ingest.inputs.size(); ++i) {
    try {
      loaded.push_back(load_one(ingest.inputs[i], ingest));
      loaded_at.push_back(i);
    } catch (const std::exception& ex) {
      results[i].name = label_of(ingest.inputs[i]);
      results[i].error = ex.what();
    }
  }

  fs::create_directories(out_dir);
  const auto analyzed = chaoskit::analyze_all(loaded, opts, boxes_dump);
  for (std::size_t j = 0; j < analyzed.size(); ++j) results[loaded_at[j]] = analyzed[j];

  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.ok()) {
      ++failed;
      std::fprintf(stderr, "series %s failed: %s\n", r.name.c_str(), r.error.c_str());
      continue;
    }
    const std::string name = chaoskit::sanitize_name(r.name);
    const std::string fnn_path = out_dir + "/fnn_" + name + ".csv";
    chaoskit::write_fnn_csv(fnn_path, r.fnn_curve);
    chaoskit::write_plot_meta(fnn_path + ".meta.json", "False nearest neighbours: " + r.name,
                              "embedding dimension m", "FNN fraction", /*log_y=*/true);
    if (r.mle) {
      const std::string stretch_path = out_dir + "/stretch_" + name + ".csv";
      chaoskit::write_stretch_csv(stretch_path, r.mle->curve);
      chaoskit::write_plot_meta(stretch_path + ".meta.json", "Stretching factor: " + r.name,
                                "delta n (steps)", "s", /*log_y=*/false);
    }
    if (boxes_dump && !r.boxes.empty()) {
      chaoskit::write_box_csv(out_dir + "/boxes_" + name + ".csv", r.boxes);
    }
  }

  std::optional<chaoskit::LambdaRatio> ratio;
  if (!lambda_ratio.empty()) {
    const auto comma = lambda_ratio.find(',');
    if (comma == std::string::npos) {
      std::fprintf(stderr, "error: --lambda-ratio expects two comma-separated series names\n");
      return kExitUsage;
    }
    const std::string a = lambda_ratio.substr(0, comma);
    const std::string b = lambda_ratio.substr(comma + 1);
    const chaoskit::SeriesResult* ra = nullptr;
    const chaoskit::SeriesResult* rb = nullptr;
    for (const auto& r : results) {
      if (r.name == a) ra = &r;
      if (r.name == b) rb = &r;
    }
    if (ra && rb && ra->ok() && rb->ok() && ra->mle && rb->mle && rb->mle->lambda != 0.0) {
      ratio = chaoskit::LambdaRatio{a, b, ra->mle->lambda / rb->mle->lambda};
      std::printf("lambda_ratio %s/%s = %s\n", a.c_str(), b.c_str(),
                  chaoskit::format_double(ratio->value).c_str());
    } else {
      std::fprintf(stderr, "warning: lambda ratio %s/%s not computable\n", a.c_str(), b.c_str());
    }
  }

  if (format == "csv" || format == "both")
    chaoskit::write_report_csv(out_dir + "/report.csv", results);
  if (format == "json" || format == "both")
    chaoskit::write_report_json(out_dir + "/report.json", results, opts, ratio);

  for (const auto& r : results) {
    if (!r.ok()) continue;
    std::printf("%s: n=%zu tau=%d m=%d", r.name.c_str(), r.n, r.tau, r.m);
    if (r.mle) std::printf(" lambda=%.6g", r.mle->lambda);
    if (r.determinism) std::printf(" kappa=%.6g", r.determinism->kappa);
    if (!r.flags.empty()) std::printf(" [%s]", chaoskit::join_flags(r.flags).c_str());
    std::printf("\n");
  }

  if (failed == results.size()) return kExitAllFailed;
  if (failed > 0) return kExitPartial;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear time-series analysis: delay embeddings, false nearest neighbours, "
               "maximal Lyapunov exponents and the determinism coefficient kappa"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Flat key=value config file (keys like pipeline.fnn-star); "
                 "command-line flags override its entries");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Full analysis with report files");
  IngestOptions p_ingest;
  add_ingest_options(pipeline, p_ingest, /*multiple=*/true);
  chaoskit::AnalysisOptions p_opts;
  std::string p_lag_method = "acf-1e";
  std::string p_norm = "max";
  add_analysis_options(pipeline, p_opts, p_lag_method, p_norm);
  std::string out_dir = "chaoskit-out";
  std::string format = "both";
  bool boxes_dump = false;
  std::string lambda_ratio;
  pipeline->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  pipeline->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  pipeline->add_flag("--boxes-dump", boxes_dump, "Write per-box determinism tables");
  pipeline->add_option("--lambda-ratio", lambda_ratio,
                       "Two series names A,B: report lambda_A / lambda_B");

  // lag
  auto* lag = app.add_subcommand("lag", "Estimate the delay tau");
  IngestOptions l_ingest;
  add_ingest_options(lag, l_ingest, /*multiple=*/false);
  std::string l_method = "acf-1e";
  int l_tau = 1;
  std::string l_curve_out;
  lag->add_option("--method", l_method, "acf-1e, acf-zero or fixed")
      ->check(CLI::IsMember({"acf-1e", "acf-zero", "fixed"}))
      ->capture_default_str();
  lag->add_option("--tau", l_tau, "Delay value for --method fixed")->capture_default_str();
  lag->add_option("--curve-out", l_curve_out, "Write the autocorrelation curve CSV here");

  // fnn
  auto* fnn = app.add_subcommand("fnn", "Minimum embedding dimension via false nearest neighbours");
  IngestOptions f_ingest;
  add_ingest_options(fnn, f_ingest, /*multiple=*/false);
  int f_tau = 1;
  double f_r = 10.0, f_sigma = 0.0, f_star = 0.005;
  int f_mmax = 30, f_theiler = -1;
  unsigned f_threads = 0;
  std::string f_curve_out;
  fnn->add_option("--tau", f_tau, "Delay")->capture_default_str();
  fnn->add_option("--r", f_r, "Distance-ratio threshold")->capture_default_str();
  fnn->add_option("--sigma", f_sigma, "Scale cutoff (0 = series std)")->capture_default_str();
  fnn->add_option("--fnn-star", f_star, "Convergence threshold")->capture_default_str();
  fnn->add_option("--m-max", f_mmax, "Largest dimension tried")->capture_default_str();
  fnn->add_option("--theiler", f_theiler, "Temporal exclusion (-1 = (m-1)*tau)")
      ->capture_default_str();
  fnn->add_option("--threads", f_threads, "Worker threads (0 = hardware)")->capture_default_str();
  fnn->add_option("--curve-out", f_curve_out, "Write the FNN curve CSV here");

  // mle
  auto* mle = app.add_subcommand("mle", "Maximal Lyapunov exponent from the stretching factor");
  IngestOptions m_ingest;
  add_ingest_options(mle, m_ingest, /*multiple=*/false);
  int m_m = 0, m_tau = 1, m_theiler = -1, m_min_nb = 1, m_maxdn = 40, m_window = 8;
  int m_k1 = -1, m_k2 = -1;
  double m_eps = 0.0, m_eps_factor = 0.1;
  std::string m_norm = "max", m_curve_out;
  unsigned m_threads = 0;
  mle->add_option("--m", m_m, "Embedding dimension")->required();
  mle->add_option("--tau", m_tau, "Delay")->capture_default_str();
  mle->add_option("--theiler", m_theiler, "Temporal exclusion (-1 = (m-1)*tau)")
      ->capture_default_str();
  mle->add_option("--eps", m_eps, "Neighbourhood radius (0 = auto escalation)")
      ->capture_default_str();
  mle->add_option("--eps-factor", m_eps_factor, "Auto radius start, fraction of sigma")
      ->capture_default_str();
  mle->add_option("--min-neighbors", m_min_nb, "Minimum neighbours per reference")
      ->capture_default_str();
  mle->add_option("--max-delta-n", m_maxdn, "Curve horizon (steps)")->capture_default_str();
  mle->add_option("--fit-window", m_window, "Sliding fit-window length")->capture_default_str();
  mle->add_option("--k1", m_k1, "Manual fit range start");
  mle->add_option("--k2", m_k2, "Manual fit range end");
  mle->add_option("--norm", m_norm, "max or euclidean")
      ->check(CLI::IsMember({"max", "euclidean"}))
      ->capture_default_str();
  mle->add_option("--threads", m_threads, "Worker threads (0 = hardware)")->capture_default_str();
  mle->add_option("--curve-out", m_curve_out, "Write the stretching curve CSV here");

  // determinism
  auto* det = app.add_subcommand("determinism", "Determinism coefficient kappa");
  IngestOptions d_ingest;
  add_ingest_options(det, d_ingest, /*multiple=*/false);
  int d_m = 0, d_tau = 1, d_bins = 25, d_nmin = 2;
  bool d_proj = false;
  std::string d_boxes_out;
  det->add_option("--m", d_m, "Embedding dimension")->required();
  det->add_option("--tau", d_tau, "Delay")->capture_default_str();
  det->add_option("--bins", d_bins, "Grid bins per axis")->capture_default_str();
  det->add_option("--n-min", d_nmin, "Minimum passes per counted box")->capture_default_str();
  det->add_flag("--projection-2d", d_proj, "Use only the first two delay coordinates");
  det->add_option("--boxes-out", d_boxes_out, "Write the per-box table CSV here");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic validation series");
  std::string s_map = "logistic", s_out;
  std::uint64_t s_seed = 1;
  std::size_t s_length = 1000, s_transient = 0;
  double s_r = 4.0, s_x0 = 0.2, s_a = 1.4, s_b = 0.3, s_y0 = 0.0;
  double s_sd = 1.0, s_amp = 1.0, s_period = 100.0, s_phase = 0.0, s_step_sd = 1.0;
  synth->add_option("--map", s_map, "logistic, henon, noise, sine or randomwalk")
      ->check(CLI::IsMember({"logistic", "henon", "noise", "sine", "randomwalk"}))
      ->capture_default_str();
  synth->add_option("--length", s_length, "Values to emit")->capture_default_str();
  synth->add_option("--transient", s_transient, "Initial steps to discard")->capture_default_str();
  synth->add_option("--seed", s_seed, "Random seed (noise/randomwalk)")->capture_default_str();
  synth->add_option("--r", s_r, "Logistic parameter r")->capture_default_str();
  synth->add_option("--x0", s_x0, "Initial x")->capture_default_str();
  synth->add_option("--a", s_a, "Henon a")->capture_default_str();
  synth->add_option("--b", s_b, "Henon b")->capture_default_str();
  synth->add_option("--y0", s_y0, "Henon initial y")->capture_default_str();
  synth->add_option("--sd", s_sd, "Noise standard deviation")->capture_default_str();
  synth->add_option("--amplitude", s_amp, "Sine amplitude")->capture_default_str();
  synth->add_option("--period", s_period, "Sine period (steps)")->capture_default_str();
  synth->add_option("--phase", s_phase, "Sine phase (radians)")->capture_default_str();
  synth->add_option("--step-sd", s_step_sd, "Random-walk step standard deviation")
      ->capture_default_str();
  synth->add_option("-o,--out", s_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (pipeline->parsed()) {
      return run_pipeline(p_ingest, p_opts, p_lag_method, p_norm, out_dir, format, boxes_dump,
                          lambda_ratio);
    }

    if (lag->parsed()) {
      const auto series = load_inputs(l_ingest);
      const auto est = chaoskit::estimate_lag(series[0], parse_lag_method(l_method), l_tau);
      if (!l_curve_out.empty()) {
        auto out = chaoskit::open_for_write(l_curve_out);
        out << "lag,autocorrelation\n";
        for (std::size_t i = 0; i < est.acf.size(); ++i)
          out << i + 1 << ',' << chaoskit::format_double(est.acf[i]) << '\n';
      }
      json j{{"method", to_string(est.method)}, {"tau", est.tau}, {"fallback", est.fallback}};
      std::cout << j.dump() << '\n';
      return kExitOk;
    }

    if (fnn->parsed()) {
      const auto series = load_inputs(f_ingest);
      const double sigma = f_sigma > 0.0 ? f_sigma : series[0].sigma;
      const auto res = chaoskit::min_embedding_dim(series[0], f_tau, f_r, sigma, f_theiler,
                                                   f_star, f_mmax, f_threads);
      if (!f_curve_out.empty()) {
        chaoskit::write_fnn_csv(f_curve_out, res.curve);
        chaoskit::write_plot_meta(f_curve_out + ".meta.json",
                                  "False nearest neighbours: " + series[0].label,
                                  "embedding dimension m", "FNN fraction", true);
      }
      json j{{"m_min", res.m_min}, {"converged", res.converged}, {"tau", f_tau},
             {"r", f_r}, {"sigma", sigma}};
      std::cout << j.dump() << '\n';
      return kExitOk;
    }

    if (mle->parsed()) {
      const bool manual = m_k1 >= 0 || m_k2 >= 0;
      if (manual && (m_k1 < 0 || m_k2 < 0 || m_k1 >= m_k2)) {
        std::fprintf(stderr, "error: --k1 and --k2 must both be given with k1 < k2\n");
        return kExitUsage;
      }
      const auto series = load_inputs(m_ingest);
      const auto e = chaoskit::embed(series[0], {m_tau, m_m});
      const int theiler = m_theiler >= 0 ? m_theiler : (m_m - 1) * m_tau;
      const auto norm =
          m_norm == "euclidean" ? chaoskit::Norm::euclidean : chaoskit::Norm::max;
      const auto curve =
          m_eps > 0.0 ? chaoskit::stretching_factor(e, m_eps, theiler, m_maxdn, m_min_nb, norm,
                                                    m_threads)
                      : chaoskit::stretching_factor_auto_eps(e, series[0].sigma, theiler, m_maxdn,
                                                             m_min_nb, m_eps_factor, norm,
                                                             m_threads);
      const auto est = manual ? chaoskit::fit_slope(curve, m_k1, m_k2)
                              : chaoskit::auto_fit(curve, m_window);
      if (!m_curve_out.empty()) {
        chaoskit::write_stretch_csv(m_curve_out, curve);
        chaoskit::write_plot_meta(m_curve_out + ".meta.json",
                                  "Stretching factor: " + series[0].label, "delta n (steps)", "s",
                                  false);
      }
      json j{{"lambda", est.lambda},
             {"k1", est.k1},
             {"k2", est.k2},
             {"r_squared", est.r_squared},
             {"r2_defined", est.r2_defined},
             {"non_positive_slope", est.non_positive_slope},
             {"eps", curve.eps},
             {"references", curve.reference_count}};
      std::cout << j.dump() << '\n';
      return kExitOk;
    }

    if (det->parsed()) {
      const auto series = load_inputs(d_ingest);
      const auto e = chaoskit::embed(series[0], {d_tau, d_m});
      chaoskit::VectorField field;
      const auto res = chaoskit::determinism_test(e, d_bins, d_nmin, d_proj,
                                                  d_boxes_out.empty() ? nullptr : &field);
      if (!d_boxes_out.empty())
        chaoskit::write_box_csv(d_boxes_out, chaoskit::box_table(field, d_nmin));
      json j{{"kappa", res.kappa},
             {"kappa_raw", res.kappa_raw},
             {"boxes_used", res.boxes_used},
             {"boxes_occupied", res.boxes_occupied},
             {"passes", res.passes_total},
             {"dims", res.dims},
             {"projected", res.projected}};
      std::cout << j.dump() << '\n';
      return kExitOk;
    }

    if (synth->parsed()) {
      chaoskit::MapSpec spec;
      if (s_map == "logistic") spec.params = chaoskit::LogisticParams{s_r, s_x0};
      else if (s_map == "henon") spec.params = chaoskit::HenonParams{s_a, s_b, s_x0, s_y0};
      else if (s_map == "noise") spec.params = chaoskit::NoiseParams{s_sd};
      else if (s_map == "sine") spec.params = chaoskit::SineParams{s_amp, s_period, s_phase};
      else spec.params = chaoskit::RandomWalkParams{s_step_sd};
      spec.seed = s_seed;
      spec.length = s_length;
      spec.transient = s_transient;
      const auto values = chaoskit::generate(spec);
      std::ostream* os = &std::cout;
      std::ofstream file;
      if (!s_out.empty()) {
        file = chaoskit::open_for_write(s_out);
        os = &file;
      }
      *os << "t,value\n";
      for (std::size_t t = 0; t < values.size(); ++t)
        *os << t << ',' << chaoskit::format_double(values[t]) << '\n';
      return kExitOk;
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitUsage;
  }
  return kExitUsage;
}

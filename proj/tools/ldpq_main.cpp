// Copyright 2026 The ldpq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: single fits, protocol simulation, and the
// experiment sweeps, all driven by a flat JSON config plus a few flags.
// Every run writes a manifest sufficient to reproduce it byte for byte;
// nothing in the outputs depends on --threads or on wall-clock time
// (timings are all-zero unless --timings is given).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldpq/asymptotics.hpp"
#include "ldpq/errors.hpp"
#include "ldpq/estimator.hpp"
#include "ldpq/experiments.hpp"
#include "ldpq/numerics.hpp"
#include "ldpq/protocol.hpp"
#include "ldpq/version.hpp"

namespace {

using nlohmann::json;

struct SharedOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string data_path;
  std::string preset;
  unsigned long long seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool timings = false;
  bool full_scale = false;
};

void add_shared_options(CLI::App* sub, SharedOptions& opt) {
  sub->add_option("--config", opt.config_path,
                  "JSON config file (a manifest with a \"config\" object "
                  "also works)");
  sub->add_option_function<unsigned long long>(
      "--seed",
      [&opt](unsigned long long v) {
        opt.seed = v;
        opt.seed_given = true;
      },
      "Master seed (overrides the config file)");
  sub->add_option("--out", opt.out_dir, "Output directory");
  sub->add_option("--data", opt.data_path, "CSV data file (empirical source)");
  sub->add_option("--preset", opt.preset,
                  "Named preset; the only one is 'emission'");
  sub->add_option("--threads", opt.threads,
                  "Worker threads for sweep repetitions; never changes "
                  "results");
  sub->add_flag("--timings", opt.timings,
                "Record wall times in result files (breaks byte-identity "
                "across runs)");
  sub->add_flag("--full-scale", opt.full_scale,
                "Full-scale sweep grid: n = 5000..35000 step 5000, "
                "repetitions 1000, epsilon in {1, 2.5, 5, 10}");
}

// ---------------------------------------------------------------------------
// Config plumbing.  Resolution order: built-in defaults, then the emission
// preset if requested, then the config file, then explicit flags.  The fully
// resolved config is echoed into the manifest.

json load_config_file(const SharedOptions& opt) {
  if (opt.config_path.empty()) return json::object();
  std::ifstream in(opt.config_path);
  if (!in) {
    throw ldpq::DataError("cannot open config file: " + opt.config_path);
  }
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ldpq::ConfigError(std::string("config parse error: ") + e.what());
  }
  if (cfg.is_object() && cfg.contains("config") && cfg["config"].is_object()) {
    cfg = cfg["config"];  // re-run from a manifest
  }
  if (!cfg.is_object()) {
    throw ldpq::ConfigError("config root must be a JSON object");
  }
  return cfg;
}

template <typename T>
T get_key(const json& cfg, const std::string& key, const T& fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ldpq::ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::vector<ldpq::TruncationInterval> intervals_from_json(const json& arr,
                                                          const char* key) {
  std::vector<ldpq::TruncationInterval> out;
  if (!arr.is_array()) {
    throw ldpq::ConfigError(std::string("config key '") + key +
                            "' must be an array of [lower, upper] pairs");
  }
  for (const json& pair : arr) {
    if (!pair.is_array() || pair.size() != 2) {
      throw ldpq::ConfigError(std::string("config key '") + key +
                              "' must be an array of [lower, upper] pairs");
    }
    out.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  return out;
}

json intervals_to_json(const std::vector<ldpq::TruncationInterval>& ivs) {
  json arr = json::array();
  for (const auto& iv : ivs) arr.push_back({iv.lower(), iv.upper()});
  return arr;
}

// Everything a subcommand needs, resolved once.
struct ResolvedRun {
  json resolved;  // echoed into the manifest
  ldpq::QuantileModel model;
  ldpq::TruncationInterval y_interval;
  std::vector<ldpq::TruncationInterval> x_intervals;
  ldpq::DataSource source;
  int dim = 0;
  unsigned long long seed = 0;
  ldpq::Scenario scenario = ldpq::Scenario::kPublic;
};

ldpq::Scenario parse_scenario(const std::string& name) {
  if (name == "public") return ldpq::Scenario::kPublic;
  if (name == "private") return ldpq::Scenario::kPrivate;
  if (name == "nonprivate") return ldpq::Scenario::kNonprivate;
  throw ldpq::ConfigError(
      "config key 'scenario' must be public, private, or nonprivate");
}

ldpq::DesignKind parse_design(const std::string& name) {
  if (name == "uniform") return ldpq::DesignKind::kUniform;
  if (name == "uniform_intercept") {
    return ldpq::DesignKind::kUniformWithIntercept;
  }
  if (name == "rademacher") return ldpq::DesignKind::kRademacher;
  throw ldpq::ConfigError(
      "config key 'design' must be uniform, uniform_intercept, or "
      "rademacher");
}

const char* kEmissionDownloadHint =
    "the emission preset needs the gas-turbine emission data file, which is "
    "not bundled: download the UCI 'Gas Turbine CO and NOx Emission Data "
    "Set' (2011-2015 yearly CSV files), concatenate the data rows under one "
    "header, and pass the combined file with --data";

ResolvedRun resolve_run(const SharedOptions& opt, const json& cfg,
                        const std::string& default_scenario,
                        const json& defaults) {
  const bool emission = (opt.preset == "emission");
  if (!opt.preset.empty() && !emission) {
    throw ldpq::ConfigError("unknown preset: " + opt.preset);
  }
  const ldpq::EmissionPreset preset = ldpq::emission_preset();
  if (emission && opt.data_path.empty()) {
    throw ldpq::DataError(kEmissionDownloadHint);
  }

  // Resolution order per key: config file, then emission preset, then the
  // caller's subcommand defaults, then the built-in fallback.
  auto dget = [&](const char* key, double preset_value, double fallback) {
    double base = fallback;
    if (defaults.contains(key)) base = defaults.at(key).get<double>();
    if (emission) base = preset_value;
    return get_key<double>(cfg, key, base);
  };

  ResolvedRun run{json::object(),
                  ldpq::QuantileModel(dget("alpha", preset.alpha, 0.3),
                                      dget("sigma", preset.sigma, 1.0)),
                  ldpq::TruncationInterval(
                      dget("y_lower", preset.y_interval.lower(), -2.0),
                      dget("y_upper", preset.y_interval.upper(), 2.0)),
                  {},
                  ldpq::SyntheticSource{},
                  0,
                  0,
                  ldpq::Scenario::kPublic};

  run.scenario = parse_scenario(
      get_key<std::string>(cfg, "scenario", default_scenario));
  run.seed = opt.seed_given
                 ? opt.seed
                 : get_key<unsigned long long>(cfg, "seed", 0ull);

  // Data source.
  if (!opt.data_path.empty()) {
    std::vector<int> x_columns = emission ? preset.x_columns
                                          : std::vector<int>{};
    x_columns = get_key<std::vector<int>>(cfg, "x_columns", x_columns);
    int y_column = get_key<int>(cfg, "y_column",
                                emission ? preset.y_column : 0);
    if (x_columns.empty() || y_column < 1) {
      throw ldpq::ConfigError(
          "empirical data needs x_columns and y_column in the config (or "
          "--preset emission)");
    }
    const bool has_header = get_key<bool>(cfg, "has_header", true);
    ldpq::CsvLoadResult loaded =
        ldpq::load_xy_csv(opt.data_path, x_columns, y_column, has_header);
    run.dim = static_cast<int>(loaded.x.cols());
    run.source = ldpq::EmpiricalSource{std::move(loaded.x),
                                       std::move(loaded.y)};
    run.resolved["data_rows_used"] = std::get<ldpq::EmpiricalSource>(run.source)
                                         .y.size();
    run.resolved["data_rows_rejected"] = loaded.rejected.size();
    run.resolved["x_columns"] = x_columns;
    run.resolved["y_column"] = y_column;
    run.resolved["has_header"] = has_header;
  } else {
    std::vector<double> beta_star_default{0.5, -0.3};
    if (defaults.contains("beta_star")) {
      beta_star_default =
          defaults.at("beta_star").get<std::vector<double>>();
    }
    const std::vector<double> beta_star =
        get_key<std::vector<double>>(cfg, "beta_star", beta_star_default);
    if (beta_star.empty()) {
      throw ldpq::ConfigError("config key 'beta_star' must be non-empty");
    }
    const std::string design_name = get_key<std::string>(
        cfg, "design",
        defaults.contains("design") ? defaults.at("design").get<std::string>()
                                    : std::string("uniform"));
    ldpq::SyntheticSource syn;
    syn.beta_star =
        Eigen::Map<const Eigen::VectorXd>(beta_star.data(),
                                          static_cast<long>(beta_star.size()));
    syn.design = parse_design(design_name);
    run.dim = static_cast<int>(beta_star.size());
    run.source = std::move(syn);
    run.resolved["beta_star"] = beta_star;
    run.resolved["design"] = design_name;
  }

  // Coordinate intervals: explicit config first, then the preset, then the
  // [-1, 1] cube matching the synthetic designs.
  if (cfg.contains("x_intervals")) {
    run.x_intervals = intervals_from_json(cfg.at("x_intervals"), "x_intervals");
  } else if (emission) {
    run.x_intervals = preset.x_intervals;
  } else {
    run.x_intervals.assign(static_cast<size_t>(run.dim),
                           ldpq::TruncationInterval(-1.0, 1.0));
  }
  if (static_cast<int>(run.x_intervals.size()) != run.dim) {
    throw ldpq::ConfigError(
        "config key 'x_intervals' must have one [lower, upper] pair per "
        "covariate");
  }

  run.resolved["alpha"] = run.model.alpha();
  run.resolved["sigma"] = run.model.sigma();
  run.resolved["y_lower"] = run.y_interval.lower();
  run.resolved["y_upper"] = run.y_interval.upper();
  run.resolved["x_intervals"] = intervals_to_json(run.x_intervals);
  run.resolved["scenario"] = get_key<std::string>(cfg, "scenario",
                                                  default_scenario);
  run.resolved["seed"] = run.seed;
  if (emission) run.resolved["preset"] = "emission";
  return run;
}

ldpq::FitConfig resolve_fit_config(const json& cfg, const ResolvedRun& run,
                                   int default_starts, json& resolved) {
  ldpq::FitConfig fit;
  const double halfwidth = get_key<double>(cfg, "box_halfwidth", 10.0);
  if (cfg.contains("box_lower") || cfg.contains("box_upper")) {
    const auto lo = get_key<std::vector<double>>(cfg, "box_lower", {});
    const auto hi = get_key<std::vector<double>>(cfg, "box_upper", {});
    if (static_cast<int>(lo.size()) != run.dim ||
        static_cast<int>(hi.size()) != run.dim) {
      throw ldpq::ConfigError(
          "config keys 'box_lower'/'box_upper' must both list one bound per "
          "covariate");
    }
    fit.box = ldpq::ParameterBox(
        Eigen::Map<const Eigen::VectorXd>(lo.data(), run.dim),
        Eigen::Map<const Eigen::VectorXd>(hi.data(), run.dim));
    resolved["box_lower"] = lo;
    resolved["box_upper"] = hi;
  } else {
    fit.box = ldpq::ParameterBox::cube(run.dim, halfwidth);
    resolved["box_halfwidth"] = halfwidth;
  }
  fit.n_starts = get_key<int>(cfg, "n_starts", default_starts);
  fit.gradient_tolerance = get_key<double>(cfg, "gradient_tolerance", 1e-6);
  fit.max_iterations = get_key<int>(cfg, "max_iterations", 300);
  fit.seed = run.seed;
  resolved["n_starts"] = fit.n_starts;
  resolved["gradient_tolerance"] = fit.gradient_tolerance;
  resolved["max_iterations"] = fit.max_iterations;
  return fit;
}

// ---------------------------------------------------------------------------
// Output plumbing.

std::filesystem::path ensure_out_dir(const SharedOptions& opt) {
  const std::filesystem::path dir(opt.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ldpq::DataError("cannot create output directory: " + opt.out_dir);
  return dir;
}

void write_manifest(const std::filesystem::path& dir,
                    const std::string& command, unsigned long long seed,
                    const std::vector<std::string>& outputs,
                    const json& resolved) {
  json manifest;
  manifest["artifact_version"] = ldpq::kVersion;
  manifest["command"] = command;
  manifest["master_seed"] = seed;
  manifest["outputs"] = outputs;
  manifest["config"] = resolved;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw ldpq::DataError("cannot write manifest.json");
  out << manifest.dump(2) << '\n';
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

void print_beta(const Eigen::VectorXd& beta) {
  std::cout << "beta_hat";
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    std::cout << ' ' << ldpq::format_double(beta[j]);
  }
  std::cout << '\n';
}

json fit_to_json(const ldpq::FitResult& fit) {
  json out;
  out["beta_hat"] = vector_to_json(fit.beta_hat);
  out["loglik_value"] = fit.loglik_value;
  out["converged"] = fit.converged;
  out["n_evaluations"] = fit.n_evaluations;
  out["start_index_of_winner"] = fit.start_index_of_winner;
  out["active_bounds"] = fit.active_bounds;
  return out;
}

json sandwich_to_json(const ldpq::SandwichEstimate& sw) {
  json out;
  out["a_matrix"] = matrix_to_json(sw.a_matrix);
  out["b_matrix"] = matrix_to_json(sw.b_matrix);
  out["covariance"] = matrix_to_json(sw.covariance);
  out["covariance_of_estimate"] = matrix_to_json(sw.estimate_covariance());
  out["condition_number_a"] = sw.condition_number_a;
  out["n_observations"] = sw.n_observations;
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

long resolve_n_users(const json& cfg, const ResolvedRun& run,
                     json& resolved) {
  long fallback = 1000;
  if (const auto* emp = std::get_if<ldpq::EmpiricalSource>(&run.source)) {
    fallback = emp->x.rows();
  }
  const long n = get_key<long>(cfg, "n_users", fallback);
  resolved["n_users"] = n;
  return n;
}

ldpq::ProtocolConfig protocol_config(const ResolvedRun& run, long n_users,
                                     double epsilon) {
  return ldpq::ProtocolConfig{n_users,
                              ldpq::PrivacyBudget(epsilon),
                              run.y_interval,
                              run.x_intervals,
                              run.model,
                              run.seed};
}

int run_fit(const std::string& command, const SharedOptions& opt) {
  const json cfg = load_config_file(opt);
  const std::string default_scenario = command == "fit-public" ? "public"
                                       : command == "fit-private"
                                           ? "private"
                                           : "nonprivate";
  ResolvedRun run = resolve_run(opt, cfg, default_scenario, json::object());
  const long n_users = resolve_n_users(cfg, run, run.resolved);
  const double epsilon = get_key<double>(cfg, "epsilon", 2.5);
  run.resolved["epsilon"] = epsilon;
  const ldpq::FitConfig fit_config =
      resolve_fit_config(cfg, run, 5, run.resolved);

  json fit_json;
  Eigen::VectorXd beta;
  if (command == "fit-public") {
    const auto protocol =
        ldpq::run_protocol_public(run.source, protocol_config(run, n_users,
                                                              epsilon));
    const ldpq::PsiConfig psi(run.model, run.y_interval,
                              ldpq::PrivacyBudget(epsilon));
    const ldpq::FitResult fit =
        ldpq::fit_public(protocol.observations, psi, fit_config);
    ldpq::PublicLikelihood likelihood(protocol.observations, psi);
    fit_json = fit_to_json(fit);
    fit_json["sandwich"] = sandwich_to_json(ldpq::sandwich(likelihood,
                                                           fit.beta_hat));
    fit_json["user_payload_bits"] = protocol.user_payload_bits;
    beta = fit.beta_hat;
  } else if (command == "fit-private") {
    const auto protocol = ldpq::run_protocol_private(
        run.source, protocol_config(run, n_users, epsilon));
    const ldpq::PrivacyBudget per_release =
        ldpq::split_budget(ldpq::PrivacyBudget(epsilon), run.dim);
    const ldpq::PsiConfig psi(run.model, run.y_interval, per_release);
    const auto prior = ldpq::private_prior_for(run.source, run.x_intervals);
    const ldpq::FitResult fit = ldpq::fit_private(
        protocol.observations, psi, per_release, prior, fit_config);
    ldpq::PrivateLikelihood likelihood(protocol.observations, psi,
                                       per_release, prior);
    fit_json = fit_to_json(fit);
    fit_json["sandwich"] = sandwich_to_json(ldpq::sandwich(likelihood,
                                                           fit.beta_hat));
    fit_json["user_payload_bits"] = protocol.user_payload_bits;
    beta = fit.beta_hat;
  } else {
    const auto sample = ldpq::draw_raw_sample(
        run.source, protocol_config(run, n_users, epsilon));
    const ldpq::FitResult fit = ldpq::fit_nonprivate_quantile(
        sample.first, sample.second, run.model, fit_config);
    fit_json = fit_to_json(fit);
    beta = fit.beta_hat;
  }

  const std::filesystem::path dir = ensure_out_dir(opt);
  {
    std::ofstream out(dir / "fit.json", std::ios::binary);
    if (!out) throw ldpq::DataError("cannot write fit.json");
    out << fit_json.dump(2) << '\n';
  }
  write_manifest(dir, command, run.seed, {"fit.json"}, run.resolved);
  print_beta(beta);
  return 0;
}

int run_simulate(const SharedOptions& opt) {
  const json cfg = load_config_file(opt);
  ResolvedRun run = resolve_run(opt, cfg, "public", json::object());
  const long n_users = resolve_n_users(cfg, run, run.resolved);
  const double epsilon = get_key<double>(cfg, "epsilon", 2.5);
  run.resolved["epsilon"] = epsilon;
  if (run.scenario == ldpq::Scenario::kNonprivate) {
    throw ldpq::ConfigError("simulate: scenario must be public or private");
  }

  const std::filesystem::path dir = ensure_out_dir(opt);
  const std::filesystem::path csv_path = dir / "simulated.csv";
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw ldpq::DataError("cannot write simulated.csv");

  if (run.scenario == ldpq::Scenario::kPublic) {
    const auto protocol = ldpq::run_protocol_public(
        run.source, protocol_config(run, n_users, epsilon));
    for (int j = 1; j <= run.dim; ++j) out << 'x' << j << ',';
    out << "z\n";
    for (const auto& obs : protocol.observations) {
      for (int j = 0; j < run.dim; ++j) {
        out << ldpq::format_double(obs.x[j]) << ',';
      }
      out << obs.z.value() << '\n';
    }
    run.resolved["user_payload_bits"] = protocol.user_payload_bits;
  } else {
    const auto protocol = ldpq::run_protocol_private(
        run.source, protocol_config(run, n_users, epsilon));
    for (int j = 1; j <= run.dim; ++j) out << "zx" << j << ',';
    out << "zy\n";
    for (const auto& obs : protocol.observations) {
      for (int j = 0; j < run.dim; ++j) {
        out << obs.zx[static_cast<size_t>(j)] << ',';
      }
      out << obs.zy.value() << '\n';
    }
    run.resolved["user_payload_bits"] = protocol.user_payload_bits;
  }
  if (!out) throw ldpq::DataError("write failed: simulated.csv");
  out.close();
  write_manifest(dir, "simulate", run.seed, {"simulated.csv"}, run.resolved);
  std::cout << "wrote " << csv_path.string() << '\n';
  return 0;
}

ldpq::SweepSpec resolve_sweep(const SharedOptions& opt, const json& cfg,
                              ResolvedRun& run) {
  ldpq::SweepSpec spec(run.model, run.y_interval, run.source);
  spec.scenario = run.scenario;
  spec.x_intervals = run.x_intervals;
  spec.seed = run.seed;
  spec.threads = opt.threads;
  spec.record_timings = opt.timings;

  spec.n_values = get_key<std::vector<long>>(cfg, "n_values",
                                             {1000, 4000, 16000});
  spec.epsilon_values =
      get_key<std::vector<double>>(cfg, "epsilon_values", {2.5});
  spec.repetitions = get_key<int>(cfg, "repetitions", 200);
  spec.subsample_without_replacement =
      get_key<bool>(cfg, "subsample_without_replacement", true);
  if (opt.full_scale) {
    spec.n_values = {5000, 10000, 15000, 20000, 25000, 30000, 35000};
    spec.epsilon_values = {1.0, 2.5, 5.0, 10.0};
    spec.repetitions = 1000;
  }
  spec.fit_config = resolve_fit_config(cfg, run, 2, run.resolved);

  run.resolved["n_values"] = spec.n_values;
  run.resolved["epsilon_values"] = spec.epsilon_values;
  run.resolved["repetitions"] = spec.repetitions;
  run.resolved["subsample_without_replacement"] =
      spec.subsample_without_replacement;
  run.resolved["record_timings"] = spec.record_timings;
  return spec;
}

int run_cov_sweep(const SharedOptions& opt) {
  const json cfg = load_config_file(opt);
  ResolvedRun run = resolve_run(opt, cfg, "public", json::object());
  const ldpq::SweepSpec spec = resolve_sweep(opt, cfg, run);

  const ldpq::SweepResult result = ldpq::covariance_sweep(spec);
  const std::filesystem::path dir = ensure_out_dir(opt);
  ldpq::write_sweep_csv(result, (dir / "sweep.csv").string());
  write_manifest(dir, "cov-sweep", run.seed, {"sweep.csv", "sweep_cells.csv"},
                 run.resolved);
  for (size_t g = 0; g < result.epsilon_groups.size(); ++g) {
    std::cout << "epsilon " << ldpq::format_double(result.epsilon_groups[g])
              << " slope " << ldpq::format_double(result.slope_by_epsilon[g])
              << '\n';
  }
  return 0;
}

int run_trunc_sweep(const SharedOptions& opt) {
  const json cfg = load_config_file(opt);
  // Default geometry mirrors the response-interval experiment: an intercept
  // design with a wide response range and four nested intervals.
  json defaults;
  defaults["beta_star"] = {75.0, 20.0};
  defaults["design"] = "uniform_intercept";
  defaults["y_lower"] = 40.0;
  defaults["y_upper"] = 110.0;
  ResolvedRun run = resolve_run(opt, cfg, "public", defaults);
  // resolve_fit_config and resolve_sweep read the config directly, so the
  // subcommand-specific defaults are injected into a copy.
  json cfg_with_defaults = cfg;
  if (!cfg_with_defaults.contains("box_halfwidth") &&
      !cfg_with_defaults.contains("box_lower")) {
    cfg_with_defaults["box_halfwidth"] = 150.0;
  }
  if (!cfg_with_defaults.contains("n_values")) {
    cfg_with_defaults["n_values"] = {2000};
  }
  ldpq::SweepSpec spec = resolve_sweep(opt, cfg_with_defaults, run);

  std::vector<ldpq::TruncationInterval> y_intervals;
  if (cfg.contains("y_intervals")) {
    y_intervals = intervals_from_json(cfg.at("y_intervals"), "y_intervals");
  } else {
    // Ladder centered on the resolved response interval, one seventh of its
    // width per step: for [40, 110] this is [50,100], [40,110], [30,120],
    // [20,130].  Deriving the ladder keeps the default coherent with the
    // source scale instead of assuming one particular study's units.
    const double mid = run.y_interval.midpoint();
    const double width = run.y_interval.width();
    for (int k = -1; k <= 2; ++k) {
      const double halfwidth = 0.5 * width + k * (width / 7.0);
      y_intervals.emplace_back(mid - halfwidth, mid + halfwidth);
    }
  }
  run.resolved["y_intervals"] = intervals_to_json(y_intervals);

  const ldpq::SweepResult result = ldpq::truncation_sweep(spec, y_intervals);
  const std::filesystem::path dir = ensure_out_dir(opt);
  ldpq::write_sweep_csv(result, (dir / "trunc_sweep.csv").string());
  write_manifest(dir, "trunc-sweep", run.seed,
                 {"trunc_sweep.csv", "trunc_sweep_cells.csv"}, run.resolved);
  for (const auto& cell : result.cells) {
    std::cout << "interval [" << ldpq::format_double(cell.y_lower) << ", "
              << ldpq::format_double(cell.y_upper) << "] frobenius "
              << ldpq::format_double(cell.frobenius_norm) << '\n';
  }
  return 0;
}

int run_bias_compare(const SharedOptions& opt) {
  const json cfg = load_config_file(opt);
  json defaults;
  defaults["design"] = "rademacher";
  ResolvedRun run = resolve_run(opt, cfg, "private", defaults);
  ldpq::SweepSpec spec = resolve_sweep(opt, cfg, run);
  const long reference_n =
      get_key<long>(cfg, "reference_n", spec.n_values.back());
  run.resolved["reference_n"] = reference_n;

  const ldpq::BiasResult result = ldpq::bias_compare(spec, reference_n);
  const std::filesystem::path dir = ensure_out_dir(opt);
  ldpq::write_bias_csv(result, (dir / "bias.csv").string());
  write_manifest(dir, "bias-compare", run.seed, {"bias.csv"}, run.resolved);
  for (size_t g = 0; g < result.epsilon_groups.size(); ++g) {
    std::cout << "epsilon " << ldpq::format_double(result.epsilon_groups[g])
              << " bias slope "
              << ldpq::format_double(result.slope_by_epsilon[g]) << " se "
              << ldpq::format_double(result.slope_se_by_epsilon[g]) << '\n';
  }
  return 0;
}

int run_bootstrap(const SharedOptions& opt) {
  const json cfg = load_config_file(opt);
  ResolvedRun run = resolve_run(opt, cfg, "public", json::object());
  if (run.scenario != ldpq::Scenario::kPublic) {
    throw ldpq::ConfigError("bootstrap: only the public scenario is supported");
  }
  const long n_users = resolve_n_users(cfg, run, run.resolved);
  const double epsilon = get_key<double>(cfg, "epsilon", 2.5);
  const long replicates = get_key<long>(cfg, "replicates", 200);
  run.resolved["epsilon"] = epsilon;
  run.resolved["replicates"] = replicates;
  const ldpq::FitConfig fit_config =
      resolve_fit_config(cfg, run, 2, run.resolved);

  const auto protocol = ldpq::run_protocol_public(
      run.source, protocol_config(run, n_users, epsilon));
  const ldpq::PsiConfig psi(run.model, run.y_interval,
                            ldpq::PrivacyBudget(epsilon));
  const ldpq::FitResult fit =
      ldpq::fit_public(protocol.observations, psi, fit_config);
  const ldpq::BootstrapResult boot = ldpq::bootstrap_public(
      protocol.observations, psi, fit_config, replicates, run.seed);

  json out_json;
  out_json["beta_hat"] = vector_to_json(fit.beta_hat);
  out_json["covariance"] = matrix_to_json(boot.covariance);
  out_json["n_replicates"] = boot.n_replicates;
  out_json["failures"] = boot.failures;

  const std::filesystem::path dir = ensure_out_dir(opt);
  {
    std::ofstream out(dir / "bootstrap.json", std::ios::binary);
    if (!out) throw ldpq::DataError("cannot write bootstrap.json");
    out << out_json.dump(2) << '\n';
  }
  write_manifest(dir, "bootstrap", run.seed, {"bootstrap.json"},
                 run.resolved);
  print_beta(fit.beta_hat);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit locally private submission protocols for quantile "
               "regression: fits, simulation, and experiment sweeps"};
  app.require_subcommand(1);
  SharedOptions opt;

  CLI::App* fit_public_cmd =
      app.add_subcommand("fit-public", "Run the public-covariate protocol "
                                       "and fit the released bits");
  CLI::App* fit_private_cmd =
      app.add_subcommand("fit-private", "Run the private-covariate protocol "
                                        "and fit the released bits");
  CLI::App* fit_nonprivate_cmd = app.add_subcommand(
      "fit-nonprivate", "Quantile regression on the raw (non-private) sample");
  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "Emit the perturbed dataset a protocol run releases");
  CLI::App* cov_sweep_cmd = app.add_subcommand(
      "cov-sweep", "Monte-Carlo covariance decay sweep over (n, epsilon)");
  CLI::App* trunc_sweep_cmd = app.add_subcommand(
      "trunc-sweep", "Covariance cells across response truncation intervals");
  CLI::App* bias_compare_cmd = app.add_subcommand(
      "bias-compare", "Bias of mean estimates against a non-private proxy");
  CLI::App* bootstrap_cmd = app.add_subcommand(
      "bootstrap", "Nonparametric bootstrap covariance of the public fit");
  for (CLI::App* sub :
       {fit_public_cmd, fit_private_cmd, fit_nonprivate_cmd, simulate_cmd,
        cov_sweep_cmd, trunc_sweep_cmd, bias_compare_cmd, bootstrap_cmd}) {
    add_shared_options(sub, opt);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (opt.threads < 1) {
      throw ldpq::ConfigError("--threads must be at least 1");
    }
    if (fit_public_cmd->parsed()) return run_fit("fit-public", opt);
    if (fit_private_cmd->parsed()) return run_fit("fit-private", opt);
    if (fit_nonprivate_cmd->parsed()) return run_fit("fit-nonprivate", opt);
    if (simulate_cmd->parsed()) return run_simulate(opt);
    if (cov_sweep_cmd->parsed()) return run_cov_sweep(opt);
    if (trunc_sweep_cmd->parsed()) return run_trunc_sweep(opt);
    if (bias_compare_cmd->parsed()) return run_bias_compare(opt);
    if (bootstrap_cmd->parsed()) return run_bootstrap(opt);
    throw ldpq::ConfigError("no subcommand given");
  } catch (const ldpq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ldpq::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
    return 2;
  } catch (const ldpq::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const ldpq::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

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

#include "ldpq/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string_view>

#include "ldpq/errors.hpp"
#include "ldpq/numerics.hpp"
#include "ldpq/random.hpp"

namespace ldpq {

namespace {

constexpr unsigned long long kSubsampleStreamTag = 0x737562u;  // "sub"
constexpr unsigned long long kRepSaltA = 0x9E3779B97F4A7C15ull;

// Repetition seeds mix the master seed, the n VALUE (not its index), and the
// repetition index; epsilon, the response interval, and the scenario never
// enter.  Cells differing only in those therefore see identical raw samples
// (common random numbers), and the non-private proxy in bias_compare is
// reproduced exactly when the sweep revisits reference_n.
unsigned long long repetition_seed(unsigned long long master, long n,
                                   long rep, bool identical) {
  unsigned long long h =
      splitmix64(master ^ splitmix64(static_cast<unsigned long long>(n)));
  if (!identical) {
    h = splitmix64(h ^
                   splitmix64(static_cast<unsigned long long>(rep) + kRepSaltA));
  }
  return h;
}

void validate_spec(const SweepSpec& spec) {
  if (spec.repetitions < 2) {
    throw ConfigError("sweep: repetitions must be at least 2");
  }
  if (spec.n_values.empty() || spec.epsilon_values.empty()) {
    throw ConfigError("sweep: n_values and epsilon_values must be non-empty");
  }
  long prev = 0;
  for (const long n : spec.n_values) {
    if (n <= prev) {
      throw ConfigError("sweep: n_values must be positive and ascending");
    }
    prev = n;
  }
  for (const double eps : spec.epsilon_values) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw ConfigError("sweep: epsilon values must be positive");
    }
  }
  if (spec.threads < 1) throw ConfigError("sweep: threads must be positive");
  const int dim = source_dim(spec.source);
  if (spec.fit_config.box.dim() != dim) {
    throw ConfigError("sweep: fit box dimension != source dimension");
  }
  if (spec.scenario == Scenario::kPrivate &&
      static_cast<int>(spec.x_intervals.size()) != dim) {
    throw ConfigError("sweep: private scenario needs one x interval per "
                      "coordinate");
  }
}

std::shared_ptr<const FiniteSupportPrior> build_private_prior(
    const SweepSpec& spec) {
  return private_prior_for(spec.source, spec.x_intervals);
}

EmpiricalSource subsample_rows(const EmpiricalSource& emp, long n,
                               RandomStream& stream) {
  const long rows = emp.x.rows();
  if (n > rows) {
    throw DataError("sweep: n exceeds the empirical row count");
  }
  std::vector<long> idx(static_cast<size_t>(rows));
  std::iota(idx.begin(), idx.end(), 0L);
  // Partial Fisher-Yates: after i steps the first i entries are a uniform
  // sample without replacement.
  for (long i = 0; i < n; ++i) {
    const double u = stream.uniform01();
    long j = i + static_cast<long>(u * static_cast<double>(rows - i));
    if (j >= rows) j = rows - 1;
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  EmpiricalSource out;
  out.x.resize(n, emp.x.cols());
  out.y.resize(n);
  for (long i = 0; i < n; ++i) {
    out.x.row(i) = emp.x.row(idx[static_cast<size_t>(i)]);
    out.y[i] = emp.y[idx[static_cast<size_t>(i)]];
  }
  return out;
}

Eigen::VectorXd run_one_repetition(
    const SweepSpec& spec, long n, double eps,
    const TruncationInterval& y_interval, unsigned long long rep_seed,
    const std::shared_ptr<const FiniteSupportPrior>& prior) {
  const DataSource* source = &spec.source;
  DataSource local{SyntheticSource{}};
  if (const auto* emp = std::get_if<EmpiricalSource>(&spec.source)) {
    if (spec.subsample_without_replacement) {
      RandomStream sub(rep_seed, kSubsampleStreamTag);
      local = subsample_rows(*emp, n, sub);
      source = &local;
    } else if (emp->x.rows() < n) {
      throw DataError("sweep: n exceeds the empirical row count");
    }
    // Without subsampling the protocol reads the first n rows directly.
  }

  const ProtocolConfig cfg{n,
                           PrivacyBudget(eps),
                           y_interval,
                           spec.x_intervals,
                           spec.model,
                           rep_seed};
  switch (spec.scenario) {
    case Scenario::kPublic: {
      const PublicProtocolResult run = run_protocol_public(*source, cfg);
      const PsiConfig psi(spec.model, y_interval, cfg.epsilon);
      return fit_public(run.observations, psi, spec.fit_config).beta_hat;
    }
    case Scenario::kPrivate: {
      const PrivateProtocolResult run = run_protocol_private(*source, cfg);
      const PrivacyBudget per_release =
          split_budget(cfg.epsilon, source_dim(*source));
      const PsiConfig psi(spec.model, y_interval, per_release);
      return fit_private(run.observations, psi, per_release, prior,
                         spec.fit_config)
          .beta_hat;
    }
    case Scenario::kNonprivate: {
      auto sample = draw_raw_sample(*source, cfg);
      return fit_nonprivate_quantile(sample.first, sample.second, spec.model,
                                     spec.fit_config)
          .beta_hat;
    }
  }
  throw ConfigError("sweep: unknown scenario");
}

CellResult run_cell(const SweepSpec& spec, long n, double eps,
                    const TruncationInterval& y_interval,
                    const std::shared_ptr<const FiniteSupportPrior>& prior) {
  const int m = spec.repetitions;
  std::vector<Eigen::VectorXd> fits(static_cast<size_t>(m));
  std::vector<char> failed(static_cast<size_t>(m), 0);

  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(m, spec.threads, [&](long r) {
    const unsigned long long rep_seed = repetition_seed(
        spec.seed, n, r, spec.identical_repetition_streams);
    try {
      fits[static_cast<size_t>(r)] =
          run_one_repetition(spec, n, eps, y_interval, rep_seed, prior);
    } catch (const NumericalError&) {
      failed[static_cast<size_t>(r)] = 1;
    }
  });
  const auto t1 = std::chrono::steady_clock::now();

  CellResult cell;
  cell.n = n;
  cell.epsilon = eps;
  cell.repetitions_used = m;
  cell.y_lower = y_interval.lower();
  cell.y_upper = y_interval.upper();
  for (const char f : failed) cell.failures += f;
  if (static_cast<long>(cell.failures) * 100 > m) {
    throw NumericalError("sweep: more than 1% of repetition fits failed");
  }
  const int good = m - cell.failures;
  if (good < 2) {
    throw NumericalError("sweep: fewer than two successful repetitions");
  }

  const int dim = static_cast<int>(
      fits[static_cast<size_t>(
               std::find(failed.begin(), failed.end(), 0) - failed.begin())]
          .size());
  // Combine in repetition order so results do not depend on thread count.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (int r = 0; r < m; ++r) {
    if (!failed[static_cast<size_t>(r)]) mean += fits[static_cast<size_t>(r)];
  }
  mean /= static_cast<double>(good);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (int r = 0; r < m; ++r) {
    if (failed[static_cast<size_t>(r)]) continue;
    const Eigen::VectorXd d = fits[static_cast<size_t>(r)] - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
  }
  Eigen::MatrixXd full = cov.selfadjointView<Eigen::Lower>();
  cell.covariance = full / static_cast<double>(good - 1);
  cell.mean_beta = std::move(mean);
  cell.frobenius_norm = cell.covariance.norm();
  if (spec.record_timings) {
    cell.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  }
  return cell;
}

std::vector<double> distinct_in_order(const std::vector<double>& values) {
  std::vector<double> out;
  for (const double v : values) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

double group_slope_log_log(const std::vector<const CellResult*>& cells) {
  std::vector<double> log_n;
  std::vector<double> log_f;
  for (const CellResult* c : cells) {
    if (c->frobenius_norm > 0.0) {
      log_n.push_back(std::log(static_cast<double>(c->n)));
      log_f.push_back(std::log(c->frobenius_norm));
    }
  }
  if (log_n.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  return ols_fit(log_n, log_f).slope;
}

std::string companion_path(const std::string& path) {
  const size_t slash = path.find_last_of('/');
  const size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + "_cells.csv";
  }
  return path.substr(0, dot) + "_cells" + path.substr(dot);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // fixed \n endings everywhere
  if (!out) throw DataError("cannot open output file: " + path);
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_cell(std::string_view field, double& out) {
  const std::string_view t = trim(field);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

std::shared_ptr<const FiniteSupportPrior> private_prior_for(
    const DataSource& source,
    const std::vector<TruncationInterval>& x_intervals) {
  const int dim = source_dim(source);
  if (static_cast<int>(x_intervals.size()) != dim) {
    throw ConfigError(
        "private prior: need one coordinate interval per dimension");
  }
  if (const auto* syn = std::get_if<SyntheticSource>(&source)) {
    if (syn->design != DesignKind::kRademacher) {
      throw ConfigError(
          "private scenario: synthetic sources need the Rademacher design, "
          "the only one with the finite support the mixture likelihood "
          "assumes");
    }
    for (const TruncationInterval& iv : x_intervals) {
      if (iv.lower() != -1.0 || iv.upper() != 1.0) {
        throw ConfigError(
            "private scenario: Rademacher design requires [-1, 1] coordinate "
            "intervals so the released signs match the prior support");
      }
    }
    return std::make_shared<RademacherPrior>(dim);
  }
  // Empirical source: the analyst-side support is the full file, rescaled
  // the same way the users' records are.
  const auto& emp = std::get<EmpiricalSource>(source);
  Eigen::MatrixXd points(emp.x.rows(), dim);
  for (Eigen::Index i = 0; i < emp.x.rows(); ++i) {
    for (int j = 0; j < dim; ++j) {
      const TruncationInterval& iv = x_intervals[static_cast<size_t>(j)];
      const double scaled = rescale_to_unit(truncate(emp.x(i, j), iv), iv);
      points(i, j) = std::clamp(scaled, -1.0, 1.0);
    }
  }
  const Eigen::VectorXd masses = Eigen::VectorXd::Constant(
      emp.x.rows(), 1.0 / static_cast<double>(emp.x.rows()));
  return std::make_shared<TabulatedPrior>(points, masses);
}

SweepResult covariance_sweep(const SweepSpec& spec) {
  validate_spec(spec);
  SweepResult result;
  result.dim = source_dim(spec.source);
  std::shared_ptr<const FiniteSupportPrior> prior;
  if (spec.scenario == Scenario::kPrivate) prior = build_private_prior(spec);

  result.epsilon_groups = distinct_in_order(spec.epsilon_values);
  for (const double eps : result.epsilon_groups) {
    for (const long n : spec.n_values) {
      result.cells.push_back(
          run_cell(spec, n, eps, spec.y_interval, prior));
    }
  }
  for (const double eps : result.epsilon_groups) {
    std::vector<const CellResult*> group;
    for (const CellResult& c : result.cells) {
      if (c.epsilon == eps) group.push_back(&c);
    }
    result.slope_by_epsilon.push_back(group_slope_log_log(group));
  }
  return result;
}

SweepResult truncation_sweep(
    const SweepSpec& spec, const std::vector<TruncationInterval>& y_intervals) {
  validate_spec(spec);
  if (y_intervals.empty()) {
    throw ConfigError("truncation_sweep: need at least one interval");
  }
  SweepResult result;
  result.dim = source_dim(spec.source);
  std::shared_ptr<const FiniteSupportPrior> prior;
  if (spec.scenario == Scenario::kPrivate) prior = build_private_prior(spec);

  const long n = spec.n_values.front();
  const double eps = spec.epsilon_values.front();
  result.epsilon_groups = {eps};
  result.slope_by_epsilon = {std::numeric_limits<double>::quiet_NaN()};
  for (const TruncationInterval& interval : y_intervals) {
    result.cells.push_back(run_cell(spec, n, eps, interval, prior));
  }
  return result;
}

BiasResult bias_compare(const SweepSpec& spec, long reference_n) {
  validate_spec(spec);
  if (reference_n < 1) {
    throw ConfigError("bias_compare: reference_n must be positive");
  }
  std::shared_ptr<const FiniteSupportPrior> prior;
  if (spec.scenario == Scenario::kPrivate) prior = build_private_prior(spec);

  // Ground-truth proxy: mean non-private fit at reference_n.  Repetition
  // seeds depend on (seed, n, rep) only, so a non-private sweep evaluated at
  // reference_n reproduces these very fits.
  SweepSpec proxy_spec = spec;
  proxy_spec.scenario = Scenario::kNonprivate;
  const CellResult proxy_cell =
      run_cell(proxy_spec, reference_n, spec.epsilon_values.front(),
               spec.y_interval, nullptr);

  BiasResult result;
  result.proxy = proxy_cell.mean_beta;
  result.proxy_failures = proxy_cell.failures;
  result.epsilon_groups = distinct_in_order(spec.epsilon_values);

  for (const double eps : result.epsilon_groups) {
    for (const long n : spec.n_values) {
      const CellResult cell = run_cell(spec, n, eps, spec.y_interval, prior);
      BiasCell bias;
      bias.n = n;
      bias.epsilon = eps;
      bias.bias_norm = (cell.mean_beta - result.proxy).norm();
      const int good = cell.repetitions_used - cell.failures;
      bias.bias_se =
          std::sqrt(cell.covariance.trace() / static_cast<double>(good));
      bias.repetitions_used = cell.repetitions_used;
      bias.failures = cell.failures;
      bias.wall_time_s = cell.wall_time_s;
      result.cells.push_back(bias);
    }
  }

  for (const double eps : result.epsilon_groups) {
    std::vector<double> ns;
    std::vector<double> norms;
    std::vector<double> ses;
    for (const BiasCell& c : result.cells) {
      if (c.epsilon == eps) {
        ns.push_back(static_cast<double>(c.n));
        norms.push_back(c.bias_norm);
        ses.push_back(c.bias_se);
      }
    }
    if (ns.size() < 3) {
      result.slope_by_epsilon.push_back(
          std::numeric_limits<double>::quiet_NaN());
      result.slope_se_by_epsilon.push_back(
          std::numeric_limits<double>::quiet_NaN());
    } else {
      result.slope_by_epsilon.push_back(ols_fit(ns, norms).slope);
      result.slope_se_by_epsilon.push_back(ols_slope_se_propagated(ns, ses));
    }
  }
  return result;
}

CsvLoadResult load_xy_csv(const std::string& path,
                          const std::vector<int>& x_columns, int y_column,
                          bool has_header) {
  if (x_columns.empty()) {
    throw ConfigError("load_xy_csv: x_columns must be non-empty");
  }
  int max_col = y_column;
  for (const int c : x_columns) {
    if (c < 1) throw ConfigError("load_xy_csv: column indexes are 1-based");
    max_col = std::max(max_col, c);
  }
  if (y_column < 1) {
    throw ConfigError("load_xy_csv: column indexes are 1-based");
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_xy_csv: cannot open " + path);

  CsvLoadResult result;
  const int dim = static_cast<int>(x_columns.size());
  std::vector<double> x_flat;
  std::vector<double> y_vals;
  std::vector<std::string_view> fields;
  std::string line;
  long line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (trim(line).empty()) continue;
    ++result.total_rows;

    fields.clear();
    std::string_view rest = line;
    while (true) {
      const size_t comma = rest.find(',');
      if (comma == std::string_view::npos) {
        fields.push_back(rest);
        break;
      }
      fields.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }

    if (static_cast<int>(fields.size()) < max_col) {
      std::ostringstream reason;
      reason << "column " << max_col << " out of range (row has "
             << fields.size() << " columns)";
      result.rejected.push_back({line_no, reason.str()});
      continue;
    }

    bool row_ok = true;
    double y = 0.0;
    std::vector<double> xs(static_cast<size_t>(dim));
    for (int j = 0; j < dim && row_ok; ++j) {
      const int col = x_columns[static_cast<size_t>(j)];
      if (!parse_cell(fields[static_cast<size_t>(col - 1)],
                      xs[static_cast<size_t>(j)])) {
        std::ostringstream reason;
        reason << "non-numeric value in column " << col;
        result.rejected.push_back({line_no, reason.str()});
        row_ok = false;
      }
    }
    if (row_ok && !parse_cell(fields[static_cast<size_t>(y_column - 1)], y)) {
      std::ostringstream reason;
      reason << "non-numeric value in column " << y_column;
      result.rejected.push_back({line_no, reason.str()});
      row_ok = false;
    }
    if (!row_ok) continue;

    x_flat.insert(x_flat.end(), xs.begin(), xs.end());
    y_vals.push_back(y);
  }

  const long valid = static_cast<long>(y_vals.size());
  if (valid == 0) {
    std::string detail = "load_xy_csv: no valid rows in " + path;
    if (!result.rejected.empty()) {
      detail += " (first rejection: line " +
                std::to_string(result.rejected.front().line) + ", " +
                result.rejected.front().reason + ")";
    }
    throw DataError(detail);
  }

  result.x.resize(valid, dim);
  result.y.resize(valid);
  for (long i = 0; i < valid; ++i) {
    for (int j = 0; j < dim; ++j) {
      result.x(i, j) = x_flat[static_cast<size_t>(i * dim + j)];
    }
    result.y[i] = y_vals[static_cast<size_t>(i)];
  }
  return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "n,epsilon,frobenius_norm,slope_group,repetitions,failures,"
         "wall_time_s\n";
  for (const CellResult& c : result.cells) {
    double slope = std::numeric_limits<double>::quiet_NaN();
    for (size_t g = 0; g < result.epsilon_groups.size(); ++g) {
      if (result.epsilon_groups[g] == c.epsilon) {
        slope = result.slope_by_epsilon[g];
        break;
      }
    }
    out << c.n << ',' << format_double(c.epsilon) << ','
        << format_double(c.frobenius_norm) << ',' << format_double(slope)
        << ',' << c.repetitions_used << ',' << c.failures << ','
        << format_double(c.wall_time_s) << '\n';
  }
  if (!out) throw DataError("write_sweep_csv: write failed: " + path);

  std::ofstream cells = open_output(companion_path(path));
  // Column labels are 1-based, matching the loader's column convention.
  cells << "n,epsilon,y_lower,y_upper";
  for (int j = 0; j < result.dim; ++j) cells << ",mean_" << j + 1;
  for (int i = 0; i < result.dim; ++i) {
    for (int j = 0; j < result.dim; ++j) {
      cells << ",cov_" << i + 1 << '_' << j + 1;
    }
  }
  cells << '\n';
  for (const CellResult& c : result.cells) {
    cells << c.n << ',' << format_double(c.epsilon) << ','
          << format_double(c.y_lower) << ',' << format_double(c.y_upper);
    for (int j = 0; j < result.dim; ++j) {
      cells << ',' << format_double(c.mean_beta[j]);
    }
    for (int i = 0; i < result.dim; ++i) {
      for (int j = 0; j < result.dim; ++j) {
        cells << ',' << format_double(c.covariance(i, j));
      }
    }
    cells << '\n';
  }
  if (!cells) {
    throw DataError("write_sweep_csv: write failed: " + companion_path(path));
  }
}

void write_bias_csv(const BiasResult& result, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "n,epsilon,bias_norm,bias_se,slope_group,slope_se_group,repetitions,"
         "failures,wall_time_s\n";
  for (const BiasCell& c : result.cells) {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double slope_se = std::numeric_limits<double>::quiet_NaN();
    for (size_t g = 0; g < result.epsilon_groups.size(); ++g) {
      if (result.epsilon_groups[g] == c.epsilon) {
        slope = result.slope_by_epsilon[g];
        slope_se = result.slope_se_by_epsilon[g];
        break;
      }
    }
    out << c.n << ',' << format_double(c.epsilon) << ','
        << format_double(c.bias_norm) << ',' << format_double(c.bias_se)
        << ',' << format_double(slope) << ',' << format_double(slope_se)
        << ',' << c.repetitions_used << ',' << c.failures << ','
        << format_double(c.wall_time_s) << '\n';
  }
  if (!out) throw DataError("write_bias_csv: write failed: " + path);
}

EmissionPreset emission_preset() {
  EmissionPreset preset;
  preset.x_columns = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  preset.x_intervals = {
      TruncationInterval(5.0, 10.0),      TruncationInterval(1000.0, 1030.0),
      TruncationInterval(70.0, 100.0),    TruncationInterval(4.0, 6.0),
      TruncationInterval(20.0, 30.0),     TruncationInterval(1000.0, 1100.0),
      TruncationInterval(530.0, 570.0),   TruncationInterval(130.0, 170.0),
      TruncationInterval(10.0, 15.0)};
  return preset;
}

}  // namespace ldpq

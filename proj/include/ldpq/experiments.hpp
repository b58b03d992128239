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

#ifndef LDPQ_EXPERIMENTS_HPP_
#define LDPQ_EXPERIMENTS_HPP_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ldpq/estimator.hpp"
#include "ldpq/protocol.hpp"

namespace ldpq {

enum class Scenario { kPublic, kPrivate, kNonprivate };

// Grid description for the Monte-Carlo sweeps.  Every repetition derives its
// protocol seed from (seed, n value, repetition index) only: epsilon, the
// truncation interval, and the scenario are deliberately excluded, so cells
// that differ only in those reuse the same raw samples (common random
// numbers).  That coupling is what makes the monotonicity comparisons sharp
// at moderate repetition counts.
struct SweepSpec {
  SweepSpec(QuantileModel model_in, TruncationInterval y_interval_in,
            DataSource source_in)
      : model(std::move(model_in)),
        y_interval(y_interval_in),
        source(std::move(source_in)) {}

  std::vector<long> n_values{1000, 4000, 16000};
  std::vector<double> epsilon_values{2.5};
  int repetitions = 200;
  Scenario scenario = Scenario::kPublic;
  QuantileModel model;
  TruncationInterval y_interval;
  std::vector<TruncationInterval> x_intervals;  // private scenario only
  DataSource source;
  FitConfig fit_config;
  unsigned long long seed = 0;
  int threads = 1;
  // Empirical sources: each repetition works on n rows drawn without
  // replacement; otherwise the first n rows are used.
  bool subsample_without_replacement = true;
  // Test hook: every repetition of a cell reuses one stream, which must
  // collapse the empirical covariance to exactly zero.
  bool identical_repetition_streams = false;
  // Wall times default to 0 so result files are byte-identical across runs.
  bool record_timings = false;
};

struct CellResult {
  long n = 0;
  double epsilon = 0.0;
  int repetitions_used = 0;
  int failures = 0;
  Eigen::VectorXd mean_beta;
  Eigen::MatrixXd covariance;  // divisor m - 1 over successful repetitions
  double frobenius_norm = 0.0;
  double wall_time_s = 0.0;
  double y_lower = 0.0;
  double y_upper = 0.0;
};

struct SweepResult {
  std::vector<CellResult> cells;
  // Distinct epsilon values in specification order, with the OLS slope of
  // log ||Cov||_F against log n per group (NaN when under 3 usable points).
  std::vector<double> epsilon_groups;
  std::vector<double> slope_by_epsilon;
  int dim = 0;
};

// Analyst-side support distribution for the private-scenario mixture
// likelihood.  Synthetic sources must use the Rademacher design with [-1, 1]
// coordinate intervals (exact sign-cube prior); empirical sources yield the
// rescaled rows of the full file with uniform masses.
std::shared_ptr<const FiniteSupportPrior> private_prior_for(
    const DataSource& source,
    const std::vector<TruncationInterval>& x_intervals);

// One covariance cell per (n, epsilon): m repetitions of
// {draw or subsample -> run protocol -> fit}, then the empirical mean and
// covariance of the fitted vectors.  Repetition fit failures are excluded
// and counted; more than 1% of them fails the sweep (NumericalError).
SweepResult covariance_sweep(const SweepSpec& spec);

// Covariance cells at fixed n = n_values[0] and epsilon = epsilon_values[0],
// one per response interval.  Repetition streams do not depend on the
// interval, so the cells see identical raw samples.
SweepResult truncation_sweep(const SweepSpec& spec,
                             const std::vector<TruncationInterval>& y_intervals);

struct BiasCell {
  long n = 0;
  double epsilon = 0.0;
  double bias_norm = 0.0;
  double bias_se = 0.0;  // conservative: sqrt(trace(Cov)/m)
  int repetitions_used = 0;
  int failures = 0;
  double wall_time_s = 0.0;
};

struct BiasResult {
  std::vector<BiasCell> cells;
  std::vector<double> epsilon_groups;
  std::vector<double> slope_by_epsilon;     // bias_norm against n, per group
  std::vector<double> slope_se_by_epsilon;  // propagated from bias_se
  Eigen::VectorXd proxy;  // mean non-private estimate at reference_n
  int proxy_failures = 0;
};

// Distance between the sweep's mean estimates and a ground-truth proxy: the
// mean non-private fit at reference_n on the same repetition streams.
// Running the non-private scenario against reference_n in n_values therefore
// reproduces the proxy fits exactly and reports bias 0.
BiasResult bias_compare(const SweepSpec& spec, long reference_n);

struct RejectedRow {
  long line = 0;  // 1-based physical line number
  std::string reason;
};

struct CsvLoadResult {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<RejectedRow> rejected;
  long total_rows = 0;  // data rows seen, valid or not
};

// Strict numeric CSV reader.  Columns are 1-based.  Malformed rows (wrong
// arity, non-numeric cells, out-of-range columns) are rejected row by row
// with line numbers; a file yielding zero valid rows is a DataError, as is a
// missing file.
CsvLoadResult load_xy_csv(const std::string& path,
                          const std::vector<int>& x_columns, int y_column,
                          bool has_header);

// Result-file writers.  Deterministic: shortest round-trip number formatting,
// fixed row order, no timestamps.  write_sweep_csv also writes a companion
// `<stem>_cells.csv` holding per-cell mean vectors and row-major flattened
// covariance matrices.
void write_sweep_csv(const SweepResult& result, const std::string& path);
void write_bias_csv(const BiasResult& result, const std::string& path);

// Fixed configuration reproducing the gas-turbine emission experiment:
// x columns 1-9 with their truncation intervals, y column 11 on [40, 110],
// alpha 0.3, sigma 1.
struct EmissionPreset {
  std::vector<int> x_columns;
  int y_column = 11;
  std::vector<TruncationInterval> x_intervals;
  TruncationInterval y_interval{40.0, 110.0};
  double alpha = 0.3;
  double sigma = 1.0;
  long expected_rows = 36733;
};

EmissionPreset emission_preset();

}  // namespace ldpq

#endif  // LDPQ_EXPERIMENTS_HPP_

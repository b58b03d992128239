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

#ifndef LDPQ_ESTIMATOR_HPP_
#define LDPQ_ESTIMATOR_HPP_

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ldpq/likelihood_private.hpp"
#include "ldpq/likelihood_public.hpp"
#include "ldpq/quantile_model.hpp"

namespace ldpq {

// Axis-aligned compact parameter set.  Estimates are constrained to the box,
// matching the compactness assumption behind the asymptotics.
struct ParameterBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  ParameterBox() = default;
  ParameterBox(Eigen::VectorXd lower_in, Eigen::VectorXd upper_in);

  static ParameterBox cube(int dim, double halfwidth = 10.0);

  int dim() const { return static_cast<int>(lower.size()); }
  Eigen::VectorXd project(const Eigen::VectorXd& beta) const;
  bool contains(const Eigen::VectorXd& beta, double slack = 0.0) const;
  Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
  Eigen::VectorXd width() const { return upper - lower; }
};

struct FitConfig {
  ParameterBox box;
  int n_starts = 5;
  double gradient_tolerance = 1e-6;
  int max_iterations = 300;
  unsigned long long seed = 0;
  // Extra derivative-free refinement after quasi-Newton.  Needed for
  // objectives with gradient kinks (quantile check loss); harmless but slow
  // elsewhere.
  bool final_polish = false;
};

struct FitResult {
  Eigen::VectorXd beta_hat;
  double loglik_value = 0.0;
  bool converged = false;
  long n_evaluations = 0;
  // Coordinates where beta_hat sits on the box boundary.
  std::vector<int> active_bounds;
  int start_index_of_winner = -1;
};

// Objective fills *gradient when non-null and returns the value to MAXIMIZE.
using Objective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

// Multistart projected quasi-Newton ascent over config.box.  Start 0 is the
// box center; remaining starts are a Latin hypercube draw seeded by
// config.seed.  Ties between starts resolve to the lowest start index.
FitResult maximize(const Objective& objective, const FitConfig& config);

FitResult fit_public(const std::vector<PublicObservation>& data,
                     const PsiConfig& psi_config, const FitConfig& fit_config);

FitResult fit_private(const std::vector<PrivateObservation>& data,
                      const PsiConfig& psi_config_prime,
                      const PrivacyBudget& per_coordinate,
                      std::shared_ptr<const FiniteSupportPrior> prior,
                      const FitConfig& fit_config);

// Benchmark fit on the raw (non-private) sample: maximizes the asymmetric
// Laplace log likelihood, equivalently minimizes mean check loss.  The
// objective has gradient kinks at exact-fit points, so a polish stage always
// runs regardless of fit_config.final_polish.
FitResult fit_nonprivate_quantile(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y,
                                  const QuantileModel& model,
                                  const FitConfig& fit_config);

// Draws n indices uniformly with replacement from [0, n).
std::vector<long> resample_with_replacement(long n, RandomStream& stream);

// Test seam for bootstrap resampling; replicate r receives its own stream.
using IndexSampler = std::function<std::vector<long>(long n, long replicate)>;

struct BootstrapResult {
  Eigen::MatrixXd covariance;  // divisor B - 1
  Eigen::MatrixXd replicate_estimates;  // B x dim
  long n_replicates = 0;
  long failures = 0;
};

// Nonparametric bootstrap of the public-scenario estimator.  `sampler`
// overrides the resampling law when provided (testing hook).
BootstrapResult bootstrap_public(const std::vector<PublicObservation>& data,
                                 const PsiConfig& psi_config,
                                 const FitConfig& fit_config,
                                 long n_replicates,
                                 unsigned long long seed,
                                 const IndexSampler& sampler = nullptr);

}  // namespace ldpq

#endif  // LDPQ_ESTIMATOR_HPP_

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

#ifndef LDPQ_ASYMPTOTICS_HPP_
#define LDPQ_ASYMPTOTICS_HPP_

#include <Eigen/Dense>

#include "ldpq/quantile_model.hpp"
#include "ldpq/random.hpp"

namespace ldpq {

// Plug-in sandwich variance: with A = mean Hessian and B = mean score outer
// product at beta_hat, `covariance` estimates the limit covariance C of
// sqrt(n) (beta_hat - beta*), namely A^{-1} B A^{-1}.  The covariance of
// beta_hat itself is C / n (estimate_covariance()).
struct SandwichEstimate {
  Eigen::MatrixXd a_matrix;
  Eigen::MatrixXd b_matrix;
  Eigen::MatrixXd covariance;
  double condition_number_a = 0.0;
  long n_observations = 0;

  Eigen::MatrixXd estimate_covariance() const {
    return covariance / static_cast<double>(n_observations);
  }
};

// Assembles the sandwich from precomputed halves.  Throws
// SingularMatrixError (carrying the condition number) when A's spectral
// condition number exceeds 1e12.
SandwichEstimate sandwich_from_parts(const Eigen::MatrixXd& a_matrix,
                                     const Eigen::MatrixXd& b_matrix,
                                     long n_observations);

// Evaluator must provide mean_hessian, score_outer_mean, n_observations;
// both likelihood evaluators qualify.
template <typename Likelihood>
SandwichEstimate sandwich(const Likelihood& likelihood,
                          const Eigen::VectorXd& beta_hat) {
  return sandwich_from_parts(likelihood.mean_hessian(beta_hat),
                             likelihood.score_outer_mean(beta_hat),
                             likelihood.n_observations());
}

struct FisherEstimate {
  Eigen::MatrixXd fisher;
  Eigen::MatrixXd standard_error;  // elementwise MC standard errors
  long draws = 0;
};

// Fisher information of the released-bit model when the working model is
// correct:  E_X[ psi'(<beta, X>)^2 / (psi (1 - psi)) * X X^T ].
//
// Monte Carlo version over the Uniform[-1,1]^dim design (reports elementwise
// standard errors); grid version integrates over supplied points/weights
// (exact for quadrature rules or finite designs).
FisherEstimate fisher_correct_model(const Eigen::VectorXd& beta,
                                    const PsiConfig& config, int dim,
                                    long n_draws, RandomStream& stream);
Eigen::MatrixXd fisher_correct_model_grid(const Eigen::VectorXd& beta,
                                          const PsiConfig& config,
                                          const Eigen::MatrixXd& points,
                                          const Eigen::VectorXd& weights);

// Fisher information of non-private alpha-quantile regression under the
// asymmetric Laplace working model: alpha (1 - alpha) / sigma^2 * E[X X^T].
Eigen::MatrixXd fisher_nonprivate(const QuantileModel& model,
                                  const Eigen::MatrixXd& exx);

// Relative efficiency of an estimator with limit covariance cov_private
// against the benchmark cov_nonprivate: trace(cov_nonprivate) /
// trace(cov_private).  In (0, 1] when privacy only inflates variance.
double efficiency_ratio(const Eigen::MatrixXd& cov_nonprivate,
                        const Eigen::MatrixXd& cov_private);

}  // namespace ldpq

#endif  // LDPQ_ASYMPTOTICS_HPP_

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

#ifndef LDPQ_LIKELIHOOD_PUBLIC_HPP_
#define LDPQ_LIKELIHOOD_PUBLIC_HPP_

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ldpq/mechanisms.hpp"
#include "ldpq/quantile_model.hpp"
#include "ldpq/random.hpp"

namespace ldpq {

// One record of the public-design scenario: the known explanatory vector and
// the single released response bit.
struct PublicObservation {
  Eigen::VectorXd x;
  Bit z{0};
};

// i.i.d. Uniform[-1, 1]^dim design draw; consumes dim uniforms.
Eigen::VectorXd sample_design_x(int dim, RandomStream& stream);

// Response-bit probability Lambda(beta, x) = psi(<beta, x>).
double lambda_eps(const Eigen::VectorXd& beta, const Eigen::VectorXd& x,
                  const PsiConfig& config);

// Mean log-likelihood of the released bits under the working model,
//   (1/n) sum_i [ z_i log Lambda_i + (1 - z_i) log(1 - Lambda_i) ].
// The design density f_X does not involve beta and is dropped; this shifts
// the objective by a constant and nothing else.
//
// The evaluator packs the data once and reuses scratch buffers across
// evaluations.  All reductions are chunked in index order and combined
// pairwise, so values are reproducible to the bit regardless of the thread
// schedule around the caller.  Instances are not safe for concurrent use.
class PublicLikelihood {
 public:
  PublicLikelihood(std::span<const PublicObservation> data,
                   const PsiConfig& config);

  int dim() const { return static_cast<int>(x_.cols()); }
  long n_observations() const { return static_cast<long>(x_.rows()); }
  const PsiConfig& config() const { return config_; }

  double value(const Eigen::VectorXd& beta) const;
  double value_and_gradient(const Eigen::VectorXd& beta,
                            Eigen::VectorXd& gradient) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& beta) const;
  // Mean Hessian of per-record log-likelihoods; alias of hessian().
  Eigen::MatrixXd mean_hessian(const Eigen::VectorXd& beta) const {
    return hessian(beta);
  }
  // (1/n) sum_i score_i score_i^T, the outer-product half of the variance
  // sandwich.
  Eigen::MatrixXd score_outer_mean(const Eigen::VectorXd& beta) const;

 private:
  double value_and_gradient_impl(const Eigen::VectorXd& beta,
                                 Eigen::VectorXd* gradient) const;

  Eigen::MatrixXd x_;            // n x d
  std::vector<uint8_t> z_;       // released bits
  PsiConfig config_;
  mutable Eigen::VectorXd theta_;  // scratch: x_ * beta
};

// Free-function forms of the same quantities.
double loglik_public(const Eigen::VectorXd& beta,
                     std::span<const PublicObservation> data,
                     const PsiConfig& config);
Eigen::VectorXd loglik_public_gradient(const Eigen::VectorXd& beta,
                                       std::span<const PublicObservation> data,
                                       const PsiConfig& config);
Eigen::MatrixXd loglik_public_hessian(const Eigen::VectorXd& beta,
                                      std::span<const PublicObservation> data,
                                      const PsiConfig& config);

}  // namespace ldpq

#endif  // LDPQ_LIKELIHOOD_PUBLIC_HPP_

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

#ifndef LDPQ_QUANTILE_MODEL_HPP_
#define LDPQ_QUANTILE_MODEL_HPP_

#include "ldpq/mechanisms.hpp"
#include "ldpq/random.hpp"

namespace ldpq {

// Working model for alpha-quantile regression: the asymmetric Laplace
// distribution with quantile level alpha in (0, 1) and scale sigma > 0.
// Its location parameter is exactly the alpha-quantile.
class QuantileModel {
 public:
  QuantileModel(double alpha, double sigma);
  double alpha() const { return alpha_; }
  double sigma() const { return sigma_; }

 private:
  double alpha_;
  double sigma_;
};

// Check loss rho_alpha(tau) = tau * (alpha - 1[tau <= 0]).  Nonnegative,
// convex, zero only at tau = 0.
double check_loss(double tau, double alpha);

// Asymmetric Laplace density / CDF with location mu:
//   f(y) = alpha (1 - alpha) / sigma * exp(-rho_alpha((y - mu) / sigma))
//   F(y) = alpha * exp((1 - alpha)(y - mu)/sigma)            for y <= mu
//        = 1 - (1 - alpha) * exp(-alpha (y - mu)/sigma)      for y >  mu
double ald_pdf(double y, double mu, const QuantileModel& model);
double ald_cdf(double y, double mu, const QuantileModel& model);

// Exact inverse-CDF draw; consumes one uniform from the open interval.
double ald_sample(double mu, const QuantileModel& model, RandomStream& stream);

// Everything needed to evaluate the marginal probability that the one-bit
// response release equals 1 given the linear index theta = <beta, x>:
// truncation interval, privacy budget, and the working model.
class PsiConfig {
 public:
  PsiConfig(const QuantileModel& model, const TruncationInterval& interval,
            const PrivacyBudget& budget);
  const QuantileModel& model() const { return model_; }
  const TruncationInterval& interval() const { return interval_; }
  const PrivacyBudget& budget() const { return budget_; }
  // 1 / (C_eps * (u - l)); the slope scale of psi.
  double inv_cw() const { return inv_cw_; }

 private:
  QuantileModel model_;
  TruncationInterval interval_;
  PrivacyBudget budget_;
  double inv_cw_;
};

struct PsiValues {
  double value;
  double d1;
  double d2;
};

// The three analytic pieces of psi; which one applies depends on where theta
// sits relative to the truncation interval.
enum class PsiBranch { kBelowLower, kInterior, kAboveUpper };

// psi(theta) = P(released response bit = 1 | theta), marginalized over the
// asymmetric Laplace response, truncation, and the one-bit randomizer.
// Strictly increasing, C^2, bounded in (1/(e^eps+1), e^eps/(e^eps+1)).
double psi(double theta, const PsiConfig& config);
double psi_d1(double theta, const PsiConfig& config);
double psi_d2(double theta, const PsiConfig& config);

// Fused evaluation of psi and both derivatives; the hot path of every
// likelihood sweep.
PsiValues psi_all(double theta, const PsiConfig& config);

// Evaluates one specific analytic piece, including at (or beyond) its seam.
// Lets tests compare one-sided limits of adjacent pieces directly.
PsiValues psi_branch(double theta, PsiBranch branch, const PsiConfig& config);

}  // namespace ldpq

#endif  // LDPQ_QUANTILE_MODEL_HPP_

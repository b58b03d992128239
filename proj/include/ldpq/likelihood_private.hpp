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

#ifndef LDPQ_LIKELIHOOD_PRIVATE_HPP_
#define LDPQ_LIKELIHOOD_PRIVATE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ldpq/mechanisms.hpp"
#include "ldpq/quantile_model.hpp"

namespace ldpq {

// Private-scenario record: the released sign vector for the explanatory
// coordinates and the released response bit.
struct PrivateObservation {
  std::vector<int> zx;  // entries in {-1, +1}
  Bit zy{0};
};

// Mixture response probabilities are enumerated over the prior support;
// beyond 20 released coordinates the 2^k sums are refused, and past 12 a
// one-time stderr note flags the cost.
inline constexpr int kPhiHardDimCap = 20;
inline constexpr int kPhiWarnDim = 12;

// Finite-support prior for the (rescaled) explanatory vector on [-1, 1]^k.
// The curator cannot see x, so the likelihood averages over this prior.
class FiniteSupportPrior {
 public:
  virtual ~FiniteSupportPrior() = default;
  virtual int dim() const = 0;
  virtual long size() const = 0;
  virtual double mass(long index) const = 0;
  virtual void point(long index, Eigen::VectorXd& out) const = 0;
};

// Uniform prior on the sign cube {-1, +1}^k; the default working prior.
// Support point `index` has coordinate j equal to +1 iff bit j of index is
// set.
class RademacherPrior final : public FiniteSupportPrior {
 public:
  explicit RademacherPrior(int k);
  int dim() const override { return k_; }
  long size() const override { return 1L << k_; }
  double mass(long) const override { return mass_; }
  void point(long index, Eigen::VectorXd& out) const override;

 private:
  int k_;
  double mass_;
};

// Arbitrary finite support: rows of `points` (each in [-1, 1]^k) with the
// given masses (positive, summing to 1 within 1e-12).
class TabulatedPrior final : public FiniteSupportPrior {
 public:
  TabulatedPrior(Eigen::MatrixXd points, Eigen::VectorXd masses);
  int dim() const override { return static_cast<int>(points_.cols()); }
  long size() const override { return static_cast<long>(points_.rows()); }
  double mass(long index) const override { return masses_[index]; }
  void point(long index, Eigen::VectorXd& out) const override {
    out = points_.row(index).transpose();
  }

 private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd masses_;
};

// Probability of observing sign vector zx when the user's rescaled
// explanatory vector is x (entries in [-1, 1]):
//   prod_j (1/2 + x_j z_j / (2 C_{eps'})).
double qzx_prob(std::span<const int> zx, const Eigen::VectorXd& x_scaled,
                const PrivacyBudget& per_coordinate);

// Marginal probability of zx under the prior.  Equals 2^-k for every zx
// under the Rademacher prior.
double phat_zx(std::span<const int> zx, const FiniteSupportPrior& prior,
               const PrivacyBudget& per_coordinate);

struct PhiValues {
  double value;
  Eigen::VectorXd d1;
  Eigen::MatrixXd d2;
};

// Response-bit probability given only the released signs:
//   phi(beta, zx) = e^{-1e-6} * E[ psi_{eps'}(<beta, X>) * Q(zx | X) ] / phat(zx),
// the prior-weighted mixture of psi over explanatory vectors compatible with
// zx.  The e^{-1e-6} factor keeps phi strictly inside (0, 1) so both log
// terms stay defined.  `config` must carry the split per-release budget
// eps' = eps / (k + 1), the same budget as `per_coordinate`.
double phi(const Eigen::VectorXd& beta, std::span<const int> zx,
           const PsiConfig& config, const FiniteSupportPrior& prior,
           const PrivacyBudget& per_coordinate);
Eigen::VectorXd phi_d1(const Eigen::VectorXd& beta, std::span<const int> zx,
                       const PsiConfig& config,
                       const FiniteSupportPrior& prior,
                       const PrivacyBudget& per_coordinate);
Eigen::MatrixXd phi_d2(const Eigen::VectorXd& beta, std::span<const int> zx,
                       const PsiConfig& config,
                       const FiniteSupportPrior& prior,
                       const PrivacyBudget& per_coordinate);
PhiValues phi_all(const Eigen::VectorXd& beta, std::span<const int> zx,
                  const PsiConfig& config, const FiniteSupportPrior& prior,
                  const PrivacyBudget& per_coordinate);

// Mean log-likelihood of the private-scenario releases,
//   (1/n) sum_i [ zy_i log phi_i + (1 - zy_i) log(1 - phi_i) ],
// with 1 - phi floored at 1e-15 before the log.  phi is cached per distinct
// zx pattern; caching only avoids recomputation and cannot change results,
// because per-observation terms are always combined in observation order.
// Instances are not safe for concurrent use.
class PrivateLikelihood {
 public:
  PrivateLikelihood(std::span<const PrivateObservation> data,
                    const PsiConfig& config, const PrivacyBudget& per_coordinate,
                    std::shared_ptr<const FiniteSupportPrior> prior);

  int dim() const { return dim_; }
  long n_observations() const { return static_cast<long>(obs_mask_.size()); }

  // Test hook: disable the per-pattern cache (recompute phi per observation).
  void set_cache_enabled(bool enabled) { cache_enabled_ = enabled; }

  double value(const Eigen::VectorXd& beta) const;
  double value_and_gradient(const Eigen::VectorXd& beta,
                            Eigen::VectorXd& gradient) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& beta) const;
  Eigen::MatrixXd mean_hessian(const Eigen::VectorXd& beta) const {
    return hessian(beta);
  }
  Eigen::MatrixXd score_outer_mean(const Eigen::VectorXd& beta) const;

 private:
  // phi values for every distinct pattern at beta, in pattern-slot order.
  void ensure_cache(const Eigen::VectorXd& beta, bool with_d2) const;
  PhiValues compute_pattern(const Eigen::VectorXd& beta, uint32_t mask,
                            bool with_d2) const;
  double value_impl(const Eigen::VectorXd& beta,
                    Eigen::VectorXd* gradient) const;

  int dim_ = 0;
  std::vector<uint32_t> obs_mask_;      // per observation
  std::vector<uint8_t> obs_zy_;         // per observation
  std::vector<uint32_t> distinct_masks_;
  std::vector<int> obs_slot_;           // observation -> distinct-mask slot
  PsiConfig config_;
  PrivacyBudget per_coordinate_;
  std::shared_ptr<const FiniteSupportPrior> prior_;
  bool cache_enabled_ = true;

  mutable Eigen::VectorXd cache_beta_;
  mutable bool cache_has_d2_ = false;
  mutable std::vector<PhiValues> cache_values_;
};

double loglik_private(const Eigen::VectorXd& beta,
                      std::span<const PrivateObservation> data,
                      const PsiConfig& config,
                      const PrivacyBudget& per_coordinate,
                      const std::shared_ptr<const FiniteSupportPrior>& prior);
Eigen::VectorXd loglik_private_gradient(
    const Eigen::VectorXd& beta, std::span<const PrivateObservation> data,
    const PsiConfig& config, const PrivacyBudget& per_coordinate,
    const std::shared_ptr<const FiniteSupportPrior>& prior);
Eigen::MatrixXd loglik_private_hessian(
    const Eigen::VectorXd& beta, std::span<const PrivateObservation> data,
    const PsiConfig& config, const PrivacyBudget& per_coordinate,
    const std::shared_ptr<const FiniteSupportPrior>& prior);

}  // namespace ldpq

#endif  // LDPQ_LIKELIHOOD_PRIVATE_HPP_

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

#include "ldpq/likelihood_private.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>
#include <unordered_map>

#include "ldpq/errors.hpp"
#include "ldpq/numerics.hpp"

namespace ldpq {
namespace {

// Strict-interior factor applied to every mixture probability.
const double kPhiShrink = std::exp(-1e-6);

// Floor applied to 1 - phi before taking the log.
constexpr double kOneMinusPhiFloor = 1e-15;

void check_phi_dim(int d) {
  if (d < 1 || d > kPhiHardDimCap) {
    throw CapabilityError(
        "phi enumeration supports 1 <= k <= " +
        std::to_string(kPhiHardDimCap) + " released coordinates, got " +
        std::to_string(d));
  }
  if (d > kPhiWarnDim) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      std::fprintf(stderr,
                   "note: phi enumerates 2^%d prior points per pattern; "
                   "expect this to be slow\n",
                   d);
    }
  }
}

uint32_t mask_from_signs(std::span<const int> zx) {
  uint32_t mask = 0;
  for (std::size_t j = 0; j < zx.size(); ++j) {
    if (zx[j] != 1 && zx[j] != -1) {
      throw ConfigError("released sign vector must have entries in {-1, +1}");
    }
    if (zx[j] == 1) mask |= (1u << j);
  }
  return mask;
}

double q_mask_prob(uint32_t mask, int d, const Eigen::VectorXd& x,
                   double half_over_c) {
  double q = 1.0;
  for (int j = 0; j < d; ++j) {
    const double sj = (mask >> j) & 1u ? 1.0 : -1.0;
    q *= 0.5 + x[j] * sj * half_over_c;
  }
  return q;
}

}  // namespace

RademacherPrior::RademacherPrior(int k) : k_(k) {
  check_phi_dim(k);
  mass_ = std::ldexp(1.0, -k);  // exact 2^-k
}

void RademacherPrior::point(long index, Eigen::VectorXd& out) const {
  out.resize(k_);
  for (int j = 0; j < k_; ++j) {
    out[j] = (index >> j) & 1L ? 1.0 : -1.0;
  }
}

TabulatedPrior::TabulatedPrior(Eigen::MatrixXd points, Eigen::VectorXd masses)
    : points_(std::move(points)), masses_(std::move(masses)) {
  if (points_.rows() < 1 || points_.rows() != masses_.size()) {
    throw ConfigError("tabulated prior needs one mass per support point");
  }
  check_phi_dim(static_cast<int>(points_.cols()));
  double total = 0.0;
  for (long i = 0; i < masses_.size(); ++i) {
    if (!(masses_[i] > 0.0)) {
      throw ConfigError("prior masses must be positive");
    }
    total += masses_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError("prior masses must sum to 1, got " +
                      std::to_string(total));
  }
  if ((points_.array().abs() > 1.0).any()) {
    throw ConfigError("prior support points must lie in [-1, 1]^k");
  }
}

double qzx_prob(std::span<const int> zx, const Eigen::VectorXd& x_scaled,
                const PrivacyBudget& per_coordinate) {
  if (static_cast<long>(zx.size()) != x_scaled.size()) {
    throw ConfigError("qzx_prob: zx and x dimension mismatch");
  }
  if ((x_scaled.array().abs() > 1.0).any()) {
    throw DataError("qzx_prob: rescaled x must lie in [-1, 1]^k");
  }
  const int d = static_cast<int>(zx.size());
  const uint32_t mask = mask_from_signs(zx);
  return q_mask_prob(mask, d, x_scaled,
                     0.5 / per_coordinate.c_epsilon());
}

double phat_zx(std::span<const int> zx, const FiniteSupportPrior& prior,
               const PrivacyBudget& per_coordinate) {
  const int d = prior.dim();
  if (static_cast<int>(zx.size()) != d) {
    throw ConfigError("phat_zx: zx dimension does not match the prior");
  }
  check_phi_dim(d);
  const uint32_t mask = mask_from_signs(zx);
  const double half_over_c = 0.5 / per_coordinate.c_epsilon();
  Eigen::VectorXd x(d);
  double total = 0.0;
  for (long i = 0; i < prior.size(); ++i) {
    prior.point(i, x);
    total += prior.mass(i) * q_mask_prob(mask, d, x, half_over_c);
  }
  return total;
}

namespace {

// Shared enumeration core.  Computing through one code path for the free
// functions and the cached evaluator guarantees cached and uncached
// evaluation agree to the bit.
PhiValues phi_mask(const Eigen::VectorXd& beta, uint32_t mask,
                   const PsiConfig& config, const FiniteSupportPrior& prior,
                   const PrivacyBudget& per_coordinate, bool with_d2) {
  const int d = prior.dim();
  if (beta.size() != d) {
    throw ConfigError("phi: beta has dimension " +
                      std::to_string(beta.size()) + " but the prior has " +
                      std::to_string(d));
  }
  check_phi_dim(d);
  const double half_over_c = 0.5 / per_coordinate.c_epsilon();
  Eigen::VectorXd x(d);
  double den = 0.0;
  double num_v = 0.0;
  Eigen::VectorXd num_g = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd num_h;
  if (with_d2) num_h = Eigen::MatrixXd::Zero(d, d);
  for (long i = 0; i < prior.size(); ++i) {
    prior.point(i, x);
    const double w = prior.mass(i) * q_mask_prob(mask, d, x, half_over_c);
    const PsiValues p = psi_all(beta.dot(x), config);
    den += w;
    num_v += w * p.value;
    num_g += (w * p.d1) * x;
    if (with_d2) {
      num_h.selfadjointView<Eigen::Lower>().rankUpdate(x, w * p.d2);
    }
  }
  PhiValues out;
  out.value = kPhiShrink * num_v / den;
  out.d1 = (kPhiShrink / den) * num_g;
  if (with_d2) {
    Eigen::MatrixXd full = num_h.selfadjointView<Eigen::Lower>();
    out.d2 = (kPhiShrink / den) * full;
  }
  return out;
}

}  // namespace

PhiValues phi_all(const Eigen::VectorXd& beta, std::span<const int> zx,
                  const PsiConfig& config, const FiniteSupportPrior& prior,
                  const PrivacyBudget& per_coordinate) {
  if (static_cast<int>(zx.size()) != prior.dim()) {
    throw ConfigError("phi: zx dimension does not match the prior");
  }
  return phi_mask(beta, mask_from_signs(zx), config, prior, per_coordinate,
                  /*with_d2=*/true);
}

double phi(const Eigen::VectorXd& beta, std::span<const int> zx,
           const PsiConfig& config, const FiniteSupportPrior& prior,
           const PrivacyBudget& per_coordinate) {
  if (static_cast<int>(zx.size()) != prior.dim()) {
    throw ConfigError("phi: zx dimension does not match the prior");
  }
  return phi_mask(beta, mask_from_signs(zx), config, prior, per_coordinate,
                  /*with_d2=*/false)
      .value;
}

Eigen::VectorXd phi_d1(const Eigen::VectorXd& beta, std::span<const int> zx,
                       const PsiConfig& config, const FiniteSupportPrior& prior,
                       const PrivacyBudget& per_coordinate) {
  if (static_cast<int>(zx.size()) != prior.dim()) {
    throw ConfigError("phi: zx dimension does not match the prior");
  }
  return phi_mask(beta, mask_from_signs(zx), config, prior, per_coordinate,
                  /*with_d2=*/false)
      .d1;
}

Eigen::MatrixXd phi_d2(const Eigen::VectorXd& beta, std::span<const int> zx,
                       const PsiConfig& config, const FiniteSupportPrior& prior,
                       const PrivacyBudget& per_coordinate) {
  if (static_cast<int>(zx.size()) != prior.dim()) {
    throw ConfigError("phi: zx dimension does not match the prior");
  }
  return phi_mask(beta, mask_from_signs(zx), config, prior, per_coordinate,
                  /*with_d2=*/true)
      .d2;
}

PrivateLikelihood::PrivateLikelihood(
    std::span<const PrivateObservation> data, const PsiConfig& config,
    const PrivacyBudget& per_coordinate,
    std::shared_ptr<const FiniteSupportPrior> prior)
    : config_(config),
      per_coordinate_(per_coordinate),
      prior_(std::move(prior)) {
  if (data.empty()) {
    throw ConfigError("private likelihood needs at least one observation");
  }
  if (prior_ == nullptr) throw ConfigError("private likelihood needs a prior");
  dim_ = prior_->dim();
  check_phi_dim(dim_);
  obs_mask_.reserve(data.size());
  obs_zy_.reserve(data.size());
  obs_slot_.reserve(data.size());
  std::unordered_map<uint32_t, int> slot_of;
  for (const PrivateObservation& obs : data) {
    if (static_cast<int>(obs.zx.size()) != dim_) {
      throw ConfigError("observation sign vector dimension mismatch");
    }
    const uint32_t mask = mask_from_signs(obs.zx);
    auto [it, inserted] =
        slot_of.emplace(mask, static_cast<int>(distinct_masks_.size()));
    if (inserted) distinct_masks_.push_back(mask);
    obs_mask_.push_back(mask);
    obs_slot_.push_back(it->second);
    obs_zy_.push_back(static_cast<uint8_t>(obs.zy.value()));
  }
}

PhiValues PrivateLikelihood::compute_pattern(const Eigen::VectorXd& beta,
                                             uint32_t mask,
                                             bool with_d2) const {
  return phi_mask(beta, mask, config_, *prior_, per_coordinate_, with_d2);
}

void PrivateLikelihood::ensure_cache(const Eigen::VectorXd& beta,
                                     bool with_d2) const {
  if (cache_beta_.size() == beta.size() && cache_beta_ == beta &&
      (!with_d2 || cache_has_d2_) && !cache_values_.empty()) {
    return;
  }
  cache_values_.resize(distinct_masks_.size());
  for (std::size_t s = 0; s < distinct_masks_.size(); ++s) {
    cache_values_[s] = compute_pattern(beta, distinct_masks_[s], with_d2);
  }
  cache_beta_ = beta;
  cache_has_d2_ = with_d2;
}

double PrivateLikelihood::value(const Eigen::VectorXd& beta) const {
  return value_impl(beta, nullptr);
}

double PrivateLikelihood::value_and_gradient(const Eigen::VectorXd& beta,
                                             Eigen::VectorXd& gradient) const {
  return value_impl(beta, &gradient);
}

double PrivateLikelihood::value_impl(const Eigen::VectorXd& beta,
                                     Eigen::VectorXd* gradient) const {
  const long n = n_observations();
  const int d = dim_;
  if (cache_enabled_) ensure_cache(beta, /*with_d2=*/false);
  std::vector<double> value_parts;
  std::vector<Eigen::VectorXd> grad_parts;
  for (long c = 0; c < n; c += kReduceChunk) {
    const long hi = std::min(n, c + kReduceChunk);
    double vpart = 0.0;
    Eigen::VectorXd gpart;
    if (gradient != nullptr) gpart = Eigen::VectorXd::Zero(d);
    for (long i = c; i < hi; ++i) {
      PhiValues scratch;
      const PhiValues& p =
          cache_enabled_ ? cache_values_[obs_slot_[i]]
                         : (scratch = compute_pattern(beta, obs_mask_[i],
                                                      false));
      if (obs_zy_[i]) {
        vpart += std::log(p.value);
        if (gradient != nullptr) gpart += p.d1 / p.value;
      } else {
        const double q = std::max(1.0 - p.value, kOneMinusPhiFloor);
        vpart += std::log(q);
        if (gradient != nullptr) gpart -= p.d1 / q;
      }
    }
    value_parts.push_back(vpart);
    if (gradient != nullptr) grad_parts.push_back(std::move(gpart));
  }
  const double value = pairwise_sum(value_parts) / static_cast<double>(n);
  if (gradient != nullptr) {
    *gradient = tree_reduce(std::move(grad_parts)) / static_cast<double>(n);
  }
  if (!std::isfinite(value)) {
    throw NumericalError("private log-likelihood is non-finite");
  }
  return value;
}

Eigen::VectorXd PrivateLikelihood::gradient(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd g;
  value_and_gradient(beta, g);
  return g;
}

Eigen::MatrixXd PrivateLikelihood::hessian(const Eigen::VectorXd& beta) const {
  const long n = n_observations();
  const int d = dim_;
  ensure_cache(beta, /*with_d2=*/true);
  std::vector<Eigen::MatrixXd> parts;
  for (long c = 0; c < n; c += kReduceChunk) {
    const long hi = std::min(n, c + kReduceChunk);
    Eigen::MatrixXd part = Eigen::MatrixXd::Zero(d, d);
    for (long i = c; i < hi; ++i) {
      PhiValues scratch;
      const PhiValues& p =
          cache_enabled_
              ? cache_values_[obs_slot_[i]]
              : (scratch = compute_pattern(beta, obs_mask_[i], true));
      if (obs_zy_[i]) {
        part += (p.d2 * p.value - p.d1 * p.d1.transpose()) /
                (p.value * p.value);
      } else {
        const double q = std::max(1.0 - p.value, kOneMinusPhiFloor);
        part += (-p.d2 * q - p.d1 * p.d1.transpose()) / (q * q);
      }
    }
    parts.push_back(std::move(part));
  }
  return tree_reduce(std::move(parts)) / static_cast<double>(n);
}

Eigen::MatrixXd PrivateLikelihood::score_outer_mean(
    const Eigen::VectorXd& beta) const {
  const long n = n_observations();
  const int d = dim_;
  ensure_cache(beta, /*with_d2=*/false);
  std::vector<Eigen::MatrixXd> parts;
  for (long c = 0; c < n; c += kReduceChunk) {
    const long hi = std::min(n, c + kReduceChunk);
    Eigen::MatrixXd part = Eigen::MatrixXd::Zero(d, d);
    for (long i = c; i < hi; ++i) {
      PhiValues scratch;
      const PhiValues& p =
          cache_enabled_
              ? cache_values_[obs_slot_[i]]
              : (scratch = compute_pattern(beta, obs_mask_[i], false));
      Eigen::VectorXd g;
      if (obs_zy_[i]) {
        g = p.d1 / p.value;
      } else {
        g = -p.d1 / std::max(1.0 - p.value, kOneMinusPhiFloor);
      }
      part.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0);
    }
    Eigen::MatrixXd full = part.selfadjointView<Eigen::Lower>();
    parts.push_back(std::move(full));
  }
  return tree_reduce(std::move(parts)) / static_cast<double>(n);
}

double loglik_private(const Eigen::VectorXd& beta,
                      std::span<const PrivateObservation> data,
                      const PsiConfig& config,
                      const PrivacyBudget& per_coordinate,
                      const std::shared_ptr<const FiniteSupportPrior>& prior) {
  return PrivateLikelihood(data, config, per_coordinate, prior).value(beta);
}

Eigen::VectorXd loglik_private_gradient(
    const Eigen::VectorXd& beta, std::span<const PrivateObservation> data,
    const PsiConfig& config, const PrivacyBudget& per_coordinate,
    const std::shared_ptr<const FiniteSupportPrior>& prior) {
  return PrivateLikelihood(data, config, per_coordinate, prior).gradient(beta);
}

Eigen::MatrixXd loglik_private_hessian(
    const Eigen::VectorXd& beta, std::span<const PrivateObservation> data,
    const PsiConfig& config, const PrivacyBudget& per_coordinate,
    const std::shared_ptr<const FiniteSupportPrior>& prior) {
  return PrivateLikelihood(data, config, per_coordinate, prior).hessian(beta);
}

}  // namespace ldpq

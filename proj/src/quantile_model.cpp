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

#include "ldpq/quantile_model.hpp"

#include <cmath>
#include <string>

#include "ldpq/errors.hpp"

namespace ldpq {
namespace {

// exp on (-inf, 0]; exponents below -745 underflow cleanly to 0 instead of
// producing subnormals that could poison downstream products.
inline double exp_neg(double t) { return t < -745.0 ? 0.0 : std::exp(t); }

}  // namespace

QuantileModel::QuantileModel(double alpha, double sigma)
    : alpha_(alpha), sigma_(sigma) {
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha >= 1.0) {
    throw ConfigError("quantile level alpha must lie in (0, 1), got " +
                      std::to_string(alpha));
  }
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw ConfigError("scale sigma must be finite and > 0, got " +
                      std::to_string(sigma));
  }
}

double check_loss(double tau, double alpha) {
  return tau <= 0.0 ? (alpha - 1.0) * tau : alpha * tau;
}

double ald_pdf(double y, double mu, const QuantileModel& model) {
  const double a = model.alpha();
  const double s = model.sigma();
  return a * (1.0 - a) / s * exp_neg(-check_loss((y - mu) / s, a));
}

double ald_cdf(double y, double mu, const QuantileModel& model) {
  const double a = model.alpha();
  const double s = model.sigma();
  if (y <= mu) return a * exp_neg((1.0 - a) * (y - mu) / s);
  return 1.0 - (1.0 - a) * exp_neg(-a * (y - mu) / s);
}

double ald_sample(double mu, const QuantileModel& model,
                  RandomStream& stream) {
  const double a = model.alpha();
  const double s = model.sigma();
  const double u = stream.uniform01_open();
  if (u <= a) return mu + s / (1.0 - a) * std::log(u / a);
  return mu - s / a * std::log((1.0 - u) / (1.0 - a));
}

PsiConfig::PsiConfig(const QuantileModel& model,
                     const TruncationInterval& interval,
                     const PrivacyBudget& budget)
    : model_(model), interval_(interval), budget_(budget) {
  inv_cw_ = 1.0 / (budget_.c_epsilon() * interval_.width());
}

// The piecewise closed form below is the exact integral of the linear
// bit-flip probability against the truncated asymmetric Laplace law.  All
// exponents passed to exp_neg are <= 0 in their branch, so no overflow path
// exists; the three pieces agree in value and first two derivatives at the
// seams.
PsiValues psi_branch(double theta, PsiBranch branch, const PsiConfig& config) {
  if (!std::isfinite(theta)) {
    throw NumericalError("psi evaluated at non-finite theta");
  }
  const double a = config.model().alpha();
  const double s = config.model().sigma();
  const double l = config.interval().lower();
  const double u = config.interval().upper();
  const double inv = config.inv_cw();
  const double half_step = 0.5 * inv * config.interval().width();  // 1/(2C)
  PsiValues out;
  switch (branch) {
    case PsiBranch::kBelowLower: {
      const double big_l = exp_neg(-a * (l - theta) / s);
      const double big_u = exp_neg(-a * (u - theta) / s);
      const double diff = big_l - big_u;
      out.value = 0.5 - half_step + (1.0 - a) * s / a * inv * diff;
      out.d1 = (1.0 - a) * inv * diff;
      out.d2 = a * (1.0 - a) / s * inv * diff;
      break;
    }
    case PsiBranch::kInterior: {
      const double g = exp_neg((1.0 - a) * (l - theta) / s);
      const double h = exp_neg(-a * (u - theta) / s);
      out.value = 0.5 + (theta - config.interval().midpoint()) * inv +
                  s * inv *
                      (a / (1.0 - a) * (g - 1.0) +
                       (1.0 - a) / a * (1.0 - h));
      out.d1 = inv * (1.0 - a * g - (1.0 - a) * h);
      out.d2 = a * (1.0 - a) / s * inv * (g - h);
      break;
    }
    case PsiBranch::kAboveUpper: {
      const double g_l = exp_neg((1.0 - a) * (l - theta) / s);
      const double g_u = exp_neg((1.0 - a) * (u - theta) / s);
      const double diff = g_l - g_u;
      out.value = 0.5 + half_step + a * s / (1.0 - a) * inv * diff;
      out.d1 = a * inv * (g_u - g_l);
      out.d2 = a * (1.0 - a) / s * inv * diff;
      break;
    }
  }
  return out;
}

namespace {

inline PsiBranch pick_branch(double theta, const PsiConfig& config) {
  if (theta <= config.interval().lower()) return PsiBranch::kBelowLower;
  if (theta >= config.interval().upper()) return PsiBranch::kAboveUpper;
  return PsiBranch::kInterior;
}

}  // namespace

PsiValues psi_all(double theta, const PsiConfig& config) {
  return psi_branch(theta, pick_branch(theta, config), config);
}

double psi(double theta, const PsiConfig& config) {
  return psi_all(theta, config).value;
}

double psi_d1(double theta, const PsiConfig& config) {
  return psi_all(theta, config).d1;
}

double psi_d2(double theta, const PsiConfig& config) {
  return psi_all(theta, config).d2;
}

}  // namespace ldpq

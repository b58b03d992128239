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

#include "ldpq/likelihood_public.hpp"

#include <cmath>
#include <string>

#include "ldpq/errors.hpp"
#include "ldpq/numerics.hpp"

namespace ldpq {

Eigen::VectorXd sample_design_x(int dim, RandomStream& stream) {
  if (dim < 1) throw ConfigError("design dimension must be >= 1");
  Eigen::VectorXd x(dim);
  for (int j = 0; j < dim; ++j) x[j] = stream.uniform(-1.0, 1.0);
  return x;
}

double lambda_eps(const Eigen::VectorXd& beta, const Eigen::VectorXd& x,
                  const PsiConfig& config) {
  if (beta.size() != x.size()) {
    throw ConfigError("lambda_eps: beta has dimension " +
                      std::to_string(beta.size()) + " but x has " +
                      std::to_string(x.size()));
  }
  return psi(beta.dot(x), config);
}

PublicLikelihood::PublicLikelihood(std::span<const PublicObservation> data,
                                   const PsiConfig& config)
    : config_(config) {
  if (data.empty()) {
    throw ConfigError("public likelihood needs at least one observation");
  }
  const long n = static_cast<long>(data.size());
  const int d = static_cast<int>(data[0].x.size());
  if (d < 1) throw ConfigError("observations must have dimension >= 1");
  x_.resize(n, d);
  z_.resize(n);
  for (long i = 0; i < n; ++i) {
    if (data[i].x.size() != d) {
      throw ConfigError("observation " + std::to_string(i) +
                        " has inconsistent dimension");
    }
    x_.row(i) = data[i].x.transpose();
    z_[i] = static_cast<uint8_t>(data[i].z.value());
  }
  theta_.resize(n);
}

double PublicLikelihood::value(const Eigen::VectorXd& beta) const {
  return value_and_gradient_impl(beta, nullptr);
}

double PublicLikelihood::value_and_gradient_impl(
    const Eigen::VectorXd& beta, Eigen::VectorXd* gradient) const {
  const long n = n_observations();
  const int d = dim();
  if (beta.size() != d) {
    throw ConfigError("log-likelihood: beta has dimension " +
                      std::to_string(beta.size()) + ", data has " +
                      std::to_string(d));
  }
  theta_.noalias() = x_ * beta;
  std::vector<double> value_parts;
  std::vector<Eigen::VectorXd> grad_parts;
  const std::size_t n_chunks =
      static_cast<std::size_t>((n + kReduceChunk - 1) / kReduceChunk);
  value_parts.reserve(n_chunks);
  if (gradient != nullptr) grad_parts.reserve(n_chunks);
  for (long c = 0; c < n; c += kReduceChunk) {
    const long hi = std::min(n, c + kReduceChunk);
    double vpart = 0.0;
    Eigen::VectorXd gpart;
    if (gradient != nullptr) gpart = Eigen::VectorXd::Zero(d);
    for (long i = c; i < hi; ++i) {
      const PsiValues p = psi_all(theta_[i], config_);
      if (z_[i]) {
        vpart += std::log(p.value);
        if (gradient != nullptr) gpart += p.d1 / p.value * x_.row(i).transpose();
      } else {
        vpart += std::log1p(-p.value);
        if (gradient != nullptr) {
          gpart -= p.d1 / (1.0 - p.value) * x_.row(i).transpose();
        }
      }
    }
    value_parts.push_back(vpart);
    if (gradient != nullptr) grad_parts.push_back(std::move(gpart));
  }
  const double value =
      pairwise_sum(value_parts) / static_cast<double>(n);
  if (gradient != nullptr) {
    *gradient = tree_reduce(std::move(grad_parts)) / static_cast<double>(n);
  }
  if (!std::isfinite(value)) {
    throw NumericalError("public log-likelihood is non-finite");
  }
  return value;
}

double PublicLikelihood::value_and_gradient(const Eigen::VectorXd& beta,
                                            Eigen::VectorXd& gradient) const {
  return value_and_gradient_impl(beta, &gradient);
}

Eigen::VectorXd PublicLikelihood::gradient(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd g;
  value_and_gradient_impl(beta, &g);
  return g;
}

Eigen::MatrixXd PublicLikelihood::hessian(const Eigen::VectorXd& beta) const {
  const long n = n_observations();
  const int d = dim();
  if (beta.size() != d) throw ConfigError("hessian: beta dimension mismatch");
  theta_.noalias() = x_ * beta;
  std::vector<Eigen::MatrixXd> parts;
  parts.reserve(static_cast<std::size_t>((n + kReduceChunk - 1) / kReduceChunk));
  for (long c = 0; c < n; c += kReduceChunk) {
    const long hi = std::min(n, c + kReduceChunk);
    Eigen::MatrixXd part = Eigen::MatrixXd::Zero(d, d);
    for (long i = c; i < hi; ++i) {
      const PsiValues p = psi_all(theta_[i], config_);
      // d^2/dtheta^2 of z log p + (1-z) log(1-p).
      double s;
      if (z_[i]) {
        s = (p.d2 * p.value - p.d1 * p.d1) / (p.value * p.value);
      } else {
        const double q = 1.0 - p.value;
        s = (-p.d2 * q - p.d1 * p.d1) / (q * q);
      }
      part.selfadjointView<Eigen::Lower>().rankUpdate(x_.row(i).transpose(), s);
    }
    Eigen::MatrixXd full = part.selfadjointView<Eigen::Lower>();
    parts.push_back(std::move(full));
  }
  return tree_reduce(std::move(parts)) / static_cast<double>(n);
}

Eigen::MatrixXd PublicLikelihood::score_outer_mean(
    const Eigen::VectorXd& beta) const {
  const long n = n_observations();
  const int d = dim();
  if (beta.size() != d) {
    throw ConfigError("score_outer_mean: beta dimension mismatch");
  }
  theta_.noalias() = x_ * beta;
  std::vector<Eigen::MatrixXd> parts;
  for (long c = 0; c < n; c += kReduceChunk) {
    const long hi = std::min(n, c + kReduceChunk);
    Eigen::MatrixXd part = Eigen::MatrixXd::Zero(d, d);
    for (long i = c; i < hi; ++i) {
      const PsiValues p = psi_all(theta_[i], config_);
      const double g =
          z_[i] ? p.d1 / p.value : -p.d1 / (1.0 - p.value);
      part.selfadjointView<Eigen::Lower>().rankUpdate(x_.row(i).transpose(),
                                                      g * g);
    }
    Eigen::MatrixXd full = part.selfadjointView<Eigen::Lower>();
    parts.push_back(std::move(full));
  }
  return tree_reduce(std::move(parts)) / static_cast<double>(n);
}

double loglik_public(const Eigen::VectorXd& beta,
                     std::span<const PublicObservation> data,
                     const PsiConfig& config) {
  return PublicLikelihood(data, config).value(beta);
}

Eigen::VectorXd loglik_public_gradient(const Eigen::VectorXd& beta,
                                       std::span<const PublicObservation> data,
                                       const PsiConfig& config) {
  return PublicLikelihood(data, config).gradient(beta);
}

Eigen::MatrixXd loglik_public_hessian(const Eigen::VectorXd& beta,
                                      std::span<const PublicObservation> data,
                                      const PsiConfig& config) {
  return PublicLikelihood(data, config).hessian(beta);
}

}  // namespace ldpq

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

#include "ldpq/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ldpq/errors.hpp"
#include "ldpq/numerics.hpp"

namespace ldpq {

namespace {

constexpr double kMaxCondition = 1e12;

}  // namespace

SandwichEstimate sandwich_from_parts(const Eigen::MatrixXd& a_matrix,
                                     const Eigen::MatrixXd& b_matrix,
                                     long n_observations) {
  if (a_matrix.rows() != a_matrix.cols() || b_matrix.rows() != b_matrix.cols() ||
      a_matrix.rows() != b_matrix.rows()) {
    throw ConfigError("sandwich: A and B must be square with matching sizes");
  }
  if (n_observations < 1) {
    throw ConfigError("sandwich: n_observations must be positive");
  }

  SandwichEstimate out;
  out.a_matrix = symmetrize(a_matrix);
  out.b_matrix = symmetrize(b_matrix);
  out.n_observations = n_observations;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.a_matrix);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("sandwich: eigendecomposition of A failed");
  }
  const Eigen::VectorXd abs_eigs = eig.eigenvalues().cwiseAbs();
  const double lambda_max = abs_eigs.maxCoeff();
  const double lambda_min = abs_eigs.minCoeff();
  if (lambda_min <= 0.0 || !std::isfinite(lambda_max)) {
    throw SingularMatrixError(
        "sandwich: mean Hessian is singular",
        std::numeric_limits<double>::infinity());
  }
  out.condition_number_a = lambda_max / lambda_min;
  if (out.condition_number_a > kMaxCondition) {
    throw SingularMatrixError(
        "sandwich: mean Hessian is numerically singular",
        out.condition_number_a);
  }

  // A^{-1} B A^{-1} via two solves; A is symmetric so LDLT applies.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(out.a_matrix);
  if (ldlt.info() != Eigen::Success) {
    throw SingularMatrixError("sandwich: LDLT factorization of A failed",
                              out.condition_number_a);
  }
  const Eigen::MatrixXd inv_a_b = ldlt.solve(out.b_matrix);
  out.covariance = symmetrize(ldlt.solve(inv_a_b.transpose()));
  if (!out.covariance.allFinite()) {
    throw NumericalError("sandwich: covariance has non-finite entries");
  }
  return out;
}

FisherEstimate fisher_correct_model(const Eigen::VectorXd& beta,
                                    const PsiConfig& config, int dim,
                                    long n_draws, RandomStream& stream) {
  if (dim < 1 || beta.size() != dim) {
    throw ConfigError("fisher_correct_model: beta size must equal dim");
  }
  if (n_draws < 2) {
    throw ConfigError("fisher_correct_model: need at least two draws");
  }

  FisherEstimate out;
  out.draws = n_draws;
  out.fisher = Eigen::MatrixXd::Zero(dim, dim);
  out.standard_error = Eigen::MatrixXd::Zero(dim, dim);

  // Accumulate sum and sum of squares per entry; chunked to keep the
  // summation order fixed and the error growth logarithmic.
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd chunk = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd chunk_sq = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd x(dim);
  long in_chunk = 0;
  for (long i = 0; i < n_draws; ++i) {
    for (int j = 0; j < dim; ++j) x[j] = stream.uniform(-1.0, 1.0);
    const double theta = beta.dot(x);
    const PsiValues p = psi_all(theta, config);
    const double denom = p.value * (1.0 - p.value);
    if (denom <= 0.0) {
      throw NumericalError("fisher_correct_model: psi reached 0 or 1");
    }
    const double w = p.d1 * p.d1 / denom;
    const Eigen::MatrixXd term = w * (x * x.transpose());
    chunk += term;
    chunk_sq += term.cwiseProduct(term);
    if (++in_chunk == kReduceChunk) {
      sum += chunk;
      sum_sq += chunk_sq;
      chunk.setZero();
      chunk_sq.setZero();
      in_chunk = 0;
    }
  }
  sum += chunk;
  sum_sq += chunk_sq;

  const double n = static_cast<double>(n_draws);
  out.fisher = symmetrize(sum / n);
  // Elementwise SE of the mean: sqrt((E[t^2] - E[t]^2) / n).
  const Eigen::MatrixXd var =
      (sum_sq / n - out.fisher.cwiseProduct(out.fisher)).cwiseMax(0.0);
  out.standard_error = (var / n).cwiseSqrt();
  return out;
}

Eigen::MatrixXd fisher_correct_model_grid(const Eigen::VectorXd& beta,
                                          const PsiConfig& config,
                                          const Eigen::MatrixXd& points,
                                          const Eigen::VectorXd& weights) {
  if (points.rows() != weights.size()) {
    throw ConfigError("fisher_correct_model_grid: points/weights mismatch");
  }
  if (points.cols() != beta.size()) {
    throw ConfigError("fisher_correct_model_grid: point dim != beta dim");
  }
  const int dim = static_cast<int>(beta.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  double total_weight = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd x = points.row(i).transpose();
    const double theta = beta.dot(x);
    const PsiValues p = psi_all(theta, config);
    const double denom = p.value * (1.0 - p.value);
    if (denom <= 0.0) {
      throw NumericalError("fisher_correct_model_grid: psi reached 0 or 1");
    }
    const double w = weights[i] * p.d1 * p.d1 / denom;
    sum.selfadjointView<Eigen::Lower>().rankUpdate(x, w);
    total_weight += weights[i];
  }
  if (total_weight <= 0.0) {
    throw ConfigError("fisher_correct_model_grid: weights sum to zero");
  }
  Eigen::MatrixXd full = sum.selfadjointView<Eigen::Lower>();
  return full / total_weight;
}

Eigen::MatrixXd fisher_nonprivate(const QuantileModel& model,
                                  const Eigen::MatrixXd& exx) {
  if (exx.rows() != exx.cols()) {
    throw ConfigError("fisher_nonprivate: E[XX^T] must be square");
  }
  const double alpha = model.alpha();
  const double sigma = model.sigma();
  return (alpha * (1.0 - alpha) / (sigma * sigma)) * exx;
}

double efficiency_ratio(const Eigen::MatrixXd& cov_nonprivate,
                        const Eigen::MatrixXd& cov_private) {
  if (cov_nonprivate.rows() != cov_private.rows() ||
      cov_nonprivate.cols() != cov_private.cols()) {
    throw ConfigError("efficiency_ratio: covariance size mismatch");
  }
  const double denom = cov_private.trace();
  if (!(denom > 0.0)) {
    throw NumericalError("efficiency_ratio: private covariance trace <= 0");
  }
  return cov_nonprivate.trace() / denom;
}

}  // namespace ldpq

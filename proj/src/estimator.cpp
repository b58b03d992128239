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

#include "ldpq/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "ldpq/errors.hpp"
#include "ldpq/numerics.hpp"
#include "ldpq/random.hpp"

namespace ldpq {

namespace {

// Stream tags keep the optimizer's start draws, polish (none needed), and
// bootstrap replicates on disjoint Philox streams for one seed.
constexpr unsigned long long kStartStreamTag = 0x7374u;      // "st"
constexpr unsigned long long kBootstrapStreamTag = 0x6273u;  // "bs"

constexpr double kArmijoC1 = 1e-4;
constexpr double kLineShrink = 0.5;
constexpr int kMaxLineSteps = 60;
constexpr double kCurvatureFloor = 1e-12;

struct TrackedObjective {
  const Objective& objective;
  long evaluations = 0;

  // Minimization view of the maximized objective.
  double neg_value(const Eigen::VectorXd& beta, Eigen::VectorXd* grad) {
    ++evaluations;
    const double v = objective(beta, grad);
    if (!std::isfinite(v)) {
      throw NumericalError("maximize: objective returned non-finite value");
    }
    if (grad != nullptr) {
      if (!grad->allFinite()) {
        throw NumericalError("maximize: objective returned non-finite gradient");
      }
      *grad = -*grad;
    }
    return -v;
  }
};

// Largest one-sided move when stepping along the projection arc; used for the
// convergence test ||x - P(x - g)||_inf <= tol.
double projected_gradient_norm(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& grad,
                               const ParameterBox& box) {
  return (x - box.project(x - grad)).lpNorm<Eigen::Infinity>();
}

// Greedy compass descent with a shrinking step.  Derivative-free, so it
// handles the check-loss kinks the quasi-Newton stage cannot.  Stops when the
// step falls below floor_scale times the widest box edge.
void compass_polish(TrackedObjective& tracked, const ParameterBox& box,
                    Eigen::VectorXd& x, double& fx, double initial_step,
                    double floor_scale, long max_evaluations) {
  const int dim = box.dim();
  const double max_width = box.width().maxCoeff();
  double step = initial_step;
  const double floor = floor_scale * max_width;
  const long eval_budget = tracked.evaluations + max_evaluations;
  while (step > floor && tracked.evaluations < eval_budget) {
    bool improved = false;
    for (int j = 0; j < dim; ++j) {
      for (const double sign : {1.0, -1.0}) {
        Eigen::VectorXd cand = x;
        cand[j] = std::min(box.upper[j], std::max(box.lower[j],
                                                  cand[j] + sign * step));
        if (cand[j] == x[j]) continue;
        const double fc = tracked.neg_value(cand, nullptr);
        if (fc < fx) {
          x = std::move(cand);
          fx = fc;
          improved = true;
          break;  // re-scan coordinates from the new point
        }
      }
      if (improved) break;
    }
    if (!improved) step *= 0.5;
  }
}

struct SingleStartResult {
  Eigen::VectorXd x;
  double fx = 0.0;  // minimization view
  bool converged = false;
};

SingleStartResult run_single_start(TrackedObjective& tracked,
                                   const FitConfig& config,
                                   const Eigen::VectorXd& start) {
  const ParameterBox& box = config.box;
  const int dim = box.dim();

  SingleStartResult out;
  out.x = box.project(start);
  Eigen::VectorXd grad(dim);
  out.fx = tracked.neg_value(out.x, &grad);

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    if (projected_gradient_norm(out.x, grad, box) <=
        config.gradient_tolerance) {
      out.converged = true;
      return out;
    }

    Eigen::VectorXd direction = -(h_inv * grad);
    if (direction.dot(grad) >= 0.0 || !direction.allFinite()) {
      h_inv.setIdentity();
      direction = -grad;
    }

    // Backtracking Armijo search along the projection arc.
    double t = 1.0;
    Eigen::VectorXd x_new;
    double f_new = out.fx;
    bool accepted = false;
    for (int ls = 0; ls < kMaxLineSteps; ++ls) {
      x_new = box.project(out.x + t * direction);
      const Eigen::VectorXd actual_step = x_new - out.x;
      if (actual_step.lpNorm<Eigen::Infinity>() == 0.0) break;
      f_new = tracked.neg_value(x_new, nullptr);
      if (f_new <= out.fx + kArmijoC1 * grad.dot(actual_step)) {
        accepted = true;
        break;
      }
      t *= kLineShrink;
    }

    if (!accepted) {
      // Gradient direction with a fresh model often recovers; if the model
      // was already fresh the compass stage below is the only fallback.
      const bool model_was_fresh = h_inv.isIdentity(0.0);
      h_inv.setIdentity();
      if (!model_was_fresh) continue;
      const double width = box.width().maxCoeff();
      const double before = out.fx;
      compass_polish(tracked, box, out.x, out.fx, 1e-3 * width, 1e-12,
                     400L * dim);
      if (out.fx < before) {
        out.fx = tracked.neg_value(out.x, &grad);
        continue;
      }
      return out;  // stuck: report best point, converged stays false
    }

    Eigen::VectorXd grad_new(dim);
    const double f_check = tracked.neg_value(x_new, &grad_new);
    (void)f_check;

    // BFGS update on the accepted step.  Projection can break curvature
    // consistency at active bounds; the s.y guard skips those updates.
    const Eigen::VectorXd s = x_new - out.x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > kCurvatureFloor * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
      const Eigen::MatrixXd left = eye - rho * s * y.transpose();
      h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
    }

    out.x = x_new;
    out.fx = f_new;
    grad = std::move(grad_new);
  }

  out.converged =
      projected_gradient_norm(out.x, grad, box) <= config.gradient_tolerance;
  return out;
}

std::vector<Eigen::VectorXd> make_starts(const FitConfig& config) {
  const ParameterBox& box = config.box;
  const int dim = box.dim();
  std::vector<Eigen::VectorXd> starts;
  starts.reserve(config.n_starts);
  starts.push_back(box.center());

  const int extra = config.n_starts - 1;
  if (extra <= 0) return starts;

  // Latin hypercube over the box: one stratum per start and dimension.
  RandomStream stream(config.seed, kStartStreamTag);
  std::vector<std::vector<int>> strata(dim, std::vector<int>(extra));
  for (int j = 0; j < dim; ++j) {
    std::iota(strata[j].begin(), strata[j].end(), 0);
    for (int i = extra - 1; i > 0; --i) {
      const int k = static_cast<int>(stream.uniform01() * (i + 1));
      std::swap(strata[j][i], strata[j][std::min(k, i)]);
    }
  }
  for (int i = 0; i < extra; ++i) {
    Eigen::VectorXd s(dim);
    for (int j = 0; j < dim; ++j) {
      const double u = (strata[j][i] + stream.uniform01()) / extra;
      s[j] = box.lower[j] + u * (box.upper[j] - box.lower[j]);
    }
    starts.push_back(std::move(s));
  }
  return starts;
}

}  // namespace

ParameterBox::ParameterBox(Eigen::VectorXd lower_in, Eigen::VectorXd upper_in)
    : lower(std::move(lower_in)), upper(std::move(upper_in)) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw ConfigError("ParameterBox: bounds must be non-empty, equal size");
  }
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) ||
        lower[j] >= upper[j]) {
      throw ConfigError("ParameterBox: need finite lower < upper per axis");
    }
  }
}

ParameterBox ParameterBox::cube(int dim, double halfwidth) {
  if (dim < 1) throw ConfigError("ParameterBox::cube: dim must be positive");
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) {
    throw ConfigError("ParameterBox::cube: halfwidth must be positive");
  }
  return ParameterBox(Eigen::VectorXd::Constant(dim, -halfwidth),
                      Eigen::VectorXd::Constant(dim, halfwidth));
}

Eigen::VectorXd ParameterBox::project(const Eigen::VectorXd& beta) const {
  if (beta.size() != lower.size()) {
    throw ConfigError("ParameterBox::project: dimension mismatch");
  }
  return beta.cwiseMax(lower).cwiseMin(upper);
}

bool ParameterBox::contains(const Eigen::VectorXd& beta, double slack) const {
  if (beta.size() != lower.size()) return false;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] < lower[j] - slack || beta[j] > upper[j] + slack) return false;
  }
  return true;
}

FitResult maximize(const Objective& objective, const FitConfig& config) {
  if (config.box.dim() == 0) {
    throw ConfigError("maximize: fit config has no parameter box");
  }
  if (config.n_starts < 1) {
    throw ConfigError("maximize: n_starts must be at least 1");
  }
  if (!(config.gradient_tolerance > 0.0)) {
    throw ConfigError("maximize: gradient_tolerance must be positive");
  }

  TrackedObjective tracked{objective};
  const std::vector<Eigen::VectorXd> starts = make_starts(config);

  FitResult result;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(starts.size()); ++i) {
    SingleStartResult r = run_single_start(tracked, config, starts[i]);
    // Strict improvement only, so equal maxima resolve to the lowest index.
    if (r.fx < best_f) {
      best_f = r.fx;
      result.beta_hat = r.x;
      result.converged = r.converged;
      result.start_index_of_winner = i;
    }
  }

  if (config.final_polish) {
    const double width = config.box.width().maxCoeff();
    compass_polish(tracked, config.box, result.beta_hat, best_f, 1e-2 * width,
                   1e-11, 50000L * config.box.dim());
    result.converged = true;
  }

  result.loglik_value = -best_f;
  result.n_evaluations = tracked.evaluations;
  result.active_bounds.clear();
  for (int j = 0; j < config.box.dim(); ++j) {
    if (result.beta_hat[j] == config.box.lower[j] ||
        result.beta_hat[j] == config.box.upper[j]) {
      result.active_bounds.push_back(j);
    }
  }
  return result;
}

FitResult fit_public(const std::vector<PublicObservation>& data,
                     const PsiConfig& psi_config,
                     const FitConfig& fit_config) {
  PublicLikelihood likelihood(data, psi_config);
  if (fit_config.box.dim() != likelihood.dim()) {
    throw ConfigError("fit_public: box dimension != design dimension");
  }
  Objective objective = [&likelihood](const Eigen::VectorXd& beta,
                                      Eigen::VectorXd* grad) {
    if (grad == nullptr) return likelihood.value(beta);
    return likelihood.value_and_gradient(beta, *grad);
  };
  return maximize(objective, fit_config);
}

FitResult fit_private(const std::vector<PrivateObservation>& data,
                      const PsiConfig& psi_config_prime,
                      const PrivacyBudget& per_coordinate,
                      std::shared_ptr<const FiniteSupportPrior> prior,
                      const FitConfig& fit_config) {
  PrivateLikelihood likelihood(data, psi_config_prime, per_coordinate,
                               std::move(prior));
  if (fit_config.box.dim() != likelihood.dim()) {
    throw ConfigError("fit_private: box dimension != design dimension");
  }
  Objective objective = [&likelihood](const Eigen::VectorXd& beta,
                                      Eigen::VectorXd* grad) {
    if (grad == nullptr) return likelihood.value(beta);
    return likelihood.value_and_gradient(beta, *grad);
  };
  return maximize(objective, fit_config);
}

FitResult fit_nonprivate_quantile(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y,
                                  const QuantileModel& model,
                                  const FitConfig& fit_config) {
  if (x.rows() != y.size() || x.rows() == 0) {
    throw ConfigError("fit_nonprivate_quantile: X rows must match y length");
  }
  if (fit_config.box.dim() != x.cols()) {
    throw ConfigError("fit_nonprivate_quantile: box dimension != X columns");
  }
  const double alpha = model.alpha();
  const double sigma = model.sigma();
  const double n = static_cast<double>(x.rows());
  const double constant = std::log(alpha * (1.0 - alpha) / sigma);

  // Mean asymmetric-Laplace log density.  At kink points (zero residuals)
  // the reported subgradient uses the left branch; the forced polish stage
  // makes the returned point optimal anyway.
  Objective objective = [&](const Eigen::VectorXd& beta,
                            Eigen::VectorXd* grad) {
    const Eigen::VectorXd residual = y - x * beta;
    double loss = 0.0;
    if (grad != nullptr) grad->setZero(x.cols());
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
      const double tau = residual[i];
      loss += check_loss(tau, alpha);
      if (grad != nullptr) {
        const double weight = (tau <= 0.0) ? (alpha - 1.0) : alpha;
        // d/dbeta of check(y - x.beta): -weight * x_i, maximized objective
        // negates the loss so the sign flips back.
        *grad += (weight / (n * sigma)) * x.row(i).transpose();
      }
    }
    return constant - loss / (n * sigma);
  };

  FitConfig polished = fit_config;
  polished.final_polish = true;
  return maximize(objective, polished);
}

std::vector<long> resample_with_replacement(long n, RandomStream& stream) {
  if (n < 1) throw ConfigError("resample_with_replacement: n must be positive");
  std::vector<long> idx(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    long k = static_cast<long>(stream.uniform01() * static_cast<double>(n));
    if (k >= n) k = n - 1;  // uniform01 < 1, guard stays for safety
    idx[static_cast<size_t>(i)] = k;
  }
  return idx;
}

BootstrapResult bootstrap_public(const std::vector<PublicObservation>& data,
                                 const PsiConfig& psi_config,
                                 const FitConfig& fit_config,
                                 long n_replicates,
                                 unsigned long long seed,
                                 const IndexSampler& sampler) {
  if (n_replicates < 1) {
    throw ConfigError("bootstrap_public: need at least one replicate");
  }
  const long n = static_cast<long>(data.size());
  if (n < 1) throw ConfigError("bootstrap_public: empty sample");
  const int dim = fit_config.box.dim();

  BootstrapResult out;
  out.replicate_estimates = Eigen::MatrixXd::Zero(n_replicates, dim);
  out.n_replicates = n_replicates;

  std::vector<PublicObservation> resampled(static_cast<size_t>(n));
  for (long r = 0; r < n_replicates; ++r) {
    std::vector<long> idx;
    if (sampler) {
      idx = sampler(n, r);
      if (static_cast<long>(idx.size()) != n) {
        throw ConfigError("bootstrap_public: sampler returned wrong count");
      }
    } else {
      RandomStream stream(seed, kBootstrapStreamTag,
                          static_cast<unsigned long long>(r));
      idx = resample_with_replacement(n, stream);
    }
    for (long i = 0; i < n; ++i) {
      const long k = idx[static_cast<size_t>(i)];
      if (k < 0 || k >= n) {
        throw ConfigError("bootstrap_public: index out of range");
      }
      resampled[static_cast<size_t>(i)] = data[static_cast<size_t>(k)];
    }
    try {
      const FitResult fit = fit_public(resampled, psi_config, fit_config);
      out.replicate_estimates.row(r) = fit.beta_hat.transpose();
    } catch (const NumericalError&) {
      ++out.failures;
      out.replicate_estimates.row(r).setConstant(
          std::numeric_limits<double>::quiet_NaN());
    }
  }

  const long good = n_replicates - out.failures;
  if (good < 2) {
    throw NumericalError("bootstrap_public: fewer than two usable replicates");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (long r = 0; r < n_replicates; ++r) {
    if (out.replicate_estimates.row(r).allFinite()) {
      mean += out.replicate_estimates.row(r).transpose();
    }
  }
  mean /= static_cast<double>(good);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (long r = 0; r < n_replicates; ++r) {
    if (out.replicate_estimates.row(r).allFinite()) {
      const Eigen::VectorXd d =
          out.replicate_estimates.row(r).transpose() - mean;
      cov.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
    }
  }
  Eigen::MatrixXd full = cov.selfadjointView<Eigen::Lower>();
  out.covariance = full / static_cast<double>(good - 1);
  return out;
}

}  // namespace ldpq

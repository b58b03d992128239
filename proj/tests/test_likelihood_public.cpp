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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ldpq/errors.hpp"
#include "ldpq/quantile_model.hpp"
#include "ldpq/random.hpp"

namespace ldpq {
namespace {

PsiConfig standard_config() {
  return PsiConfig(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                   PrivacyBudget(2.5));
}

std::vector<PublicObservation> synthetic_data(long n, int dim,
                                              const Eigen::VectorXd& beta_star,
                                              const PsiConfig& config,
                                              uint64_t seed) {
  std::vector<PublicObservation> data(n);
  RandomStream s(seed, 17);
  for (long i = 0; i < n; ++i) {
    data[i].x = sample_design_x(dim, s);
    double y = truncate(ald_sample(beta_star.dot(data[i].x), config.model(), s),
                        config.interval());
    data[i].z = bitflip_sample(y, config.interval(), config.budget(), s);
  }
  return data;
}

TEST(PublicLikelihood, SingleObservationClosedForm) {
  // With theta far above the interval the response probability saturates at
  // its upper bound e^eps/(e^eps+1), which is 3/4 at eps = ln 3.  One record
  // with z = 1 then has mean log-likelihood exactly log(3/4).
  PsiConfig config(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                   PrivacyBudget(std::log(3.0)));
  std::vector<PublicObservation> data(1);
  data[0].x = Eigen::VectorXd::Constant(1, 1.0);
  data[0].z = Bit(1);
  PublicLikelihood lik(data, config);
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, 5000.0);
  EXPECT_NEAR(lik.value(beta), std::log(0.75), 1e-12);

  data[0].z = Bit(0);
  PublicLikelihood lik0(data, config);
  EXPECT_NEAR(lik0.value(beta), std::log(0.25), 1e-12);
}

TEST(PublicLikelihood, MatchesNaiveSum) {
  PsiConfig config = standard_config();
  Eigen::VectorXd beta_star(2);
  beta_star << 0.5, -0.3;
  auto data = synthetic_data(257, 2, beta_star, config, 11);

  Eigen::VectorXd beta(2);
  beta << 0.2, 0.9;
  long double acc = 0.0L;
  for (const auto& obs : data) {
    double p = lambda_eps(beta, obs.x, config);
    acc += obs.z.value() ? std::log(p) : std::log1p(-p);
  }
  double naive = static_cast<double>(acc / static_cast<long double>(data.size()));

  PublicLikelihood lik(data, config);
  EXPECT_NEAR(lik.value(beta), naive, 1e-13 * std::abs(naive));
  EXPECT_NEAR(loglik_public(beta, data, config), naive,
              1e-13 * std::abs(naive));
}

TEST(PublicLikelihood, GradientMatchesCentralDifferences) {
  PsiConfig config = standard_config();
  Eigen::VectorXd beta_star(3);
  beta_star << 0.4, -0.2, 0.7;
  auto data = synthetic_data(400, 3, beta_star, config, 23);
  PublicLikelihood lik(data, config);

  Eigen::VectorXd beta(3);
  beta << -0.1, 0.6, 0.3;
  Eigen::VectorXd grad = lik.gradient(beta);
  double h = 1e-5;
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd bp = beta, bm = beta;
    bp[j] += h;
    bm[j] -= h;
    double fd = (lik.value(bp) - lik.value(bm)) / (2.0 * h);
    EXPECT_NEAR(grad[j], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "j=" << j;
  }

  Eigen::VectorXd grad2(3);
  double v = lik.value_and_gradient(beta, grad2);
  EXPECT_EQ(v, lik.value(beta));
  EXPECT_EQ(grad2, grad);
}

TEST(PublicLikelihood, HessianMatchesGradientDifferences) {
  PsiConfig config = standard_config();
  Eigen::VectorXd beta_star(2);
  beta_star << 0.5, -0.3;
  auto data = synthetic_data(300, 2, beta_star, config, 31);
  PublicLikelihood lik(data, config);

  Eigen::VectorXd beta(2);
  beta << 0.35, 0.15;
  Eigen::MatrixXd hess = lik.hessian(beta);
  EXPECT_NEAR(hess(0, 1), hess(1, 0), 1e-14);
  double h = 1e-5;
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd bp = beta, bm = beta;
    bp[j] += h;
    bm[j] -= h;
    Eigen::VectorXd fd = (lik.gradient(bp) - lik.gradient(bm)) / (2.0 * h);
    for (int i = 0; i < 2; ++i)
      EXPECT_NEAR(hess(i, j), fd[i], 1e-4 * std::max(1.0, std::abs(fd[i])));
  }
}

TEST(PublicLikelihood, PermutationInvariantToTolerance) {
  PsiConfig config = standard_config();
  Eigen::VectorXd beta_star(2);
  beta_star << 0.5, -0.3;
  auto data = synthetic_data(1000, 2, beta_star, config, 47);
  auto shuffled = data;
  RandomStream s(7, 3);
  for (size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1],
              shuffled[static_cast<size_t>(s.uniform(0, double(i)))]);

  Eigen::VectorXd beta(2);
  beta << 0.1, -0.8;
  PublicLikelihood a(data, config), b(shuffled, config);
  EXPECT_NEAR(a.value(beta), b.value(beta), 1e-12);
  Eigen::VectorXd ga = a.gradient(beta), gb = b.gradient(beta);
  EXPECT_LT((ga - gb).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(PublicLikelihood, ScoreNearZeroAtTruth) {
  // At the data-generating parameter the expected score vanishes; with
  // n = 20000 records the sample mean score should be within a few standard
  // errors of zero.
  PsiConfig config = standard_config();
  Eigen::VectorXd beta_star(2);
  beta_star << 0.5, -0.3;
  long n = 20000;
  auto data = synthetic_data(n, 2, beta_star, config, 53);
  PublicLikelihood lik(data, config);
  Eigen::VectorXd grad = lik.gradient(beta_star);
  Eigen::MatrixXd b = lik.score_outer_mean(beta_star);
  for (int j = 0; j < 2; ++j) {
    double se = std::sqrt(b(j, j) / static_cast<double>(n));
    EXPECT_LT(std::abs(grad[j]), 4.0 * se) << "component " << j;
  }
}

TEST(PublicLikelihood, ScoreOuterMeanIsPsdAndMatchesNaive) {
  PsiConfig config = standard_config();
  Eigen::VectorXd beta_star(2);
  beta_star << 0.5, -0.3;
  auto data = synthetic_data(150, 2, beta_star, config, 61);
  PublicLikelihood lik(data, config);
  Eigen::VectorXd beta(2);
  beta << 0.4, 0.0;

  Eigen::MatrixXd naive = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& obs : data) {
    double theta = beta.dot(obs.x);
    PsiValues p = psi_all(theta, config);
    double w = obs.z.value() ? p.d1 / p.value : -p.d1 / (1.0 - p.value);
    naive += (w * obs.x) * (w * obs.x).transpose();
  }
  naive /= static_cast<double>(data.size());

  Eigen::MatrixXd got = lik.score_outer_mean(beta);
  EXPECT_LT((got - naive).norm(), 1e-11 * std::max(1.0, naive.norm()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(got);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(PublicLikelihood, MeanHessianNegativeDefiniteNearOptimum) {
  PsiConfig config = standard_config();
  Eigen::VectorXd beta_star(2);
  beta_star << 0.5, -0.3;
  auto data = synthetic_data(5000, 2, beta_star, config, 71);
  PublicLikelihood lik(data, config);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      lik.mean_hessian(beta_star));
  EXPECT_LT(es.eigenvalues().maxCoeff(), 0.0);
}

TEST(PublicLikelihood, RejectsDimensionMismatch) {
  PsiConfig config = standard_config();
  std::vector<PublicObservation> data(2);
  data[0].x = Eigen::VectorXd::Constant(2, 0.5);
  data[0].z = Bit(1);
  data[1].x = Eigen::VectorXd::Constant(3, 0.5);
  data[1].z = Bit(0);
  EXPECT_THROW(PublicLikelihood(data, config), ConfigError);

  std::vector<PublicObservation> empty;
  EXPECT_THROW(PublicLikelihood(empty, config), ConfigError);

  data[1].x = Eigen::VectorXd::Constant(2, 0.5);
  PublicLikelihood lik(data, config);
  Eigen::VectorXd wrong(3);
  wrong.setZero();
  EXPECT_THROW(lik.value(wrong), ConfigError);
}

TEST(SampleDesignX, UniformCube) {
  RandomStream s(13, 1);
  long n = 50000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  double min_seen = 1.0, max_seen = -1.0;
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd x = sample_design_x(3, s);
    ASSERT_EQ(x.size(), 3);
    mean += x;
    min_seen = std::min(min_seen, x.minCoeff());
    max_seen = std::max(max_seen, x.maxCoeff());
  }
  mean /= static_cast<double>(n);
  // Var of U[-1,1] is 1/3; 4 standard errors around zero.
  double se = std::sqrt(1.0 / 3.0 / static_cast<double>(n));
  for (int j = 0; j < 3; ++j) EXPECT_LT(std::abs(mean[j]), 4.0 * se);
  EXPECT_GE(min_seen, -1.0);
  EXPECT_LE(max_seen, 1.0);
  EXPECT_LT(min_seen, -0.99);
  EXPECT_GT(max_seen, 0.99);
}

}  // namespace
}  // namespace ldpq

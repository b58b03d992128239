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

// Release gate.  Runs every statistical and numerical claim the library
// ships with, at full scale, and prints one [PASS]/[FAIL] line per check.
// Returns nonzero if anything fails.  Expect roughly 10-20 minutes of
// single-core runtime; progress is flushed line by line.
//
// Usage: acceptance_main [path-to-cli-binary]
// The CLI path is needed only for the determinism check and is normally
// supplied by ctest.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ldpq/asymptotics.hpp"
#include "ldpq/errors.hpp"
#include "ldpq/estimator.hpp"
#include "ldpq/experiments.hpp"
#include "ldpq/likelihood_private.hpp"
#include "ldpq/likelihood_public.hpp"
#include "ldpq/mechanisms.hpp"
#include "ldpq/numerics.hpp"
#include "ldpq/protocol.hpp"
#include "ldpq/quantile_model.hpp"
#include "ldpq/random.hpp"

namespace {

using namespace ldpq;

constexpr unsigned long long kMasterSeed = 20260817ull;

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

void report(const Check& c) {
  std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name;
  if (!c.detail.empty()) std::cout << ": " << c.detail;
  std::cout << std::endl;  // flush; later checks run for minutes
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// Checks 1 and 2 share one sweep: the full (n, eps) grid with common random
// numbers across cells.

void covariance_sweep_checks(std::vector<Check>& out) {
  SyntheticSource src;
  src.beta_star = Eigen::VectorXd(2);
  src.beta_star << 0.5, -0.3;
  SweepSpec spec(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                 DataSource(src));
  spec.n_values = {1000, 4000, 16000};
  spec.epsilon_values = {1.0, 2.5, 5.0, 10.0};
  spec.repetitions = 200;
  spec.fit_config.box = ParameterBox::cube(2, 10.0);
  spec.fit_config.n_starts = 2;
  spec.seed = kMasterSeed;

  SweepResult res = covariance_sweep(spec);

  Check decay{"covariance-decay"};
  Check monotone{"epsilon-monotonicity"};
  double slope = std::numeric_limits<double>::quiet_NaN();
  for (size_t g = 0; g < res.epsilon_groups.size(); ++g) {
    if (res.epsilon_groups[g] == 2.5) slope = res.slope_by_epsilon[g];
  }
  decay.pass = std::isfinite(slope) && slope >= -1.3 && slope <= -0.7;
  decay.detail = "log-log slope at eps 2.5 over n {1000,4000,16000}, m=200: " +
                 fmt(slope) + ", required [-1.3, -0.7]";

  std::vector<double> norms;
  for (const CellResult& cell : res.cells) {
    if (cell.n == 4000) norms.push_back(cell.frobenius_norm);
  }
  monotone.pass = norms.size() == 4;
  std::string seq;
  for (size_t i = 0; i < norms.size(); ++i) {
    if (i) {
      seq += " > ";
      if (!(norms[i] < norms[i - 1])) monotone.pass = false;
    }
    seq += fmt(norms[i]);
  }
  monotone.detail =
      "Frobenius norms at n=4000 over eps {1,2.5,5,10}: " + seq;

  out.push_back(decay);
  report(out.back());
  out.push_back(monotone);
  report(out.back());
}

// ---------------------------------------------------------------------------

Check audit_check() {
  Check c{"ldp-audit"};
  c.pass = true;
  double worst_gap = 0.0;
  long configs = 0;

  auto note = [&](const LdpAuditResult& audit, double eps,
                  const std::string& what) {
    ++configs;
    double bound = std::exp(eps);
    worst_gap = std::max(worst_gap, audit.max_ratio - bound);
    if (!(audit.max_ratio <= bound + 1e-12) || audit.pairs_checked < 100) {
      c.pass = false;
      c.detail = what + " eps " + fmt(eps) + ": max ratio " +
                 fmt(audit.max_ratio) + " vs bound " + fmt(bound) + " over " +
                 std::to_string(audit.pairs_checked) + " pairs";
    }
  };

  for (double eps : {0.5, 1.0, 2.5, 5.0}) {
    note(ldp_audit_public(TruncationInterval(-2.0, 2.0), PrivacyBudget(eps)),
         eps, "public [-2,2]");
  }
  note(ldp_audit_public(TruncationInterval(40.0, 110.0), PrivacyBudget(2.5)),
       2.5, "public [40,110]");

  std::vector<TruncationInterval> unit2{{-1.0, 1.0}, {-1.0, 1.0}};
  for (double eps : {1.0, 2.5}) {
    note(ldp_audit_private(TruncationInterval(-2.0, 2.0), unit2,
                           PrivacyBudget(eps)),
         eps, "private k=2");
  }
  std::vector<TruncationInterval> mixed{{0.0, 1.0}, {-5.0, 5.0}, {2.0, 8.0}};
  note(ldp_audit_private(TruncationInterval(-2.0, 2.0), mixed,
                         PrivacyBudget(5.0)),
       5.0, "private k=3");
  EmissionPreset preset = emission_preset();
  note(ldp_audit_private(preset.y_interval, preset.x_intervals,
                         PrivacyBudget(2.5)),
       2.5, "private k=9");

  if (c.pass) {
    c.detail = std::to_string(configs) +
               " protocol configurations, >=100 pairs each, all output "
               "ratios <= e^eps + 1e-12 (worst excess " +
               fmt(worst_gap) + ")";
  }
  return c;
}

// ---------------------------------------------------------------------------

Check psi_simulation_check() {
  Check c{"psi-vs-simulation"};
  c.pass = true;
  QuantileModel model(0.3, 1.0);
  TruncationInterval interval(40.0, 110.0);
  const double thetas[] = {35.0, 55.0, 70.0, 90.0, 115.0};
  const double epsilons[] = {1.0, 2.5};
  const long n = 1000000;
  double worst_z = 0.0;
  int point = 0;
  for (double eps : epsilons) {
    PsiConfig config(model, interval, PrivacyBudget(eps));
    for (double theta : thetas) {
      RandomStream s(kMasterSeed, 0x70736931u, static_cast<uint64_t>(point));
      long ones = 0;
      for (long i = 0; i < n; ++i) {
        double y = truncate(ald_sample(theta, model, s), interval);
        ones += bitflip_sample(y, interval, config.budget(), s).value();
      }
      double p = psi(theta, config);
      double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      double z = std::abs(static_cast<double>(ones) / n - p) / se;
      worst_z = std::max(worst_z, z);
      if (z > 4.0) {
        c.pass = false;
        c.detail = "theta " + fmt(theta) + ", eps " + fmt(eps) +
                   ": |freq - psi| = " + fmt(z) + " standard errors";
      }
      ++point;
    }
  }
  if (c.pass) {
    c.detail = "10 (theta, eps) points at 1e6 draws each; worst deviation " +
               fmt(worst_z) + " standard errors (limit 4)";
  }
  return c;
}

// ---------------------------------------------------------------------------

Check boundary_continuity_check() {
  Check c{"boundary-continuity"};
  c.pass = true;
  struct Config {
    double alpha, sigma, eps, lower, upper;
  };
  // 12 configurations: alpha x sigma x eps, alternating intervals.
  std::vector<Config> configs;
  int idx = 0;
  for (double alpha : {0.3, 0.5, 0.8}) {
    for (double sigma : {0.5, 2.0}) {
      for (double eps : {1.0, 5.0}) {
        if (idx % 2 == 0) {
          configs.push_back({alpha, sigma, eps, -2.0, 2.0});
        } else {
          configs.push_back({alpha, sigma, eps, 40.0, 110.0});
        }
        ++idx;
      }
    }
  }

  double worst = 0.0;
  for (const Config& cf : configs) {
    PsiConfig config(QuantileModel(cf.alpha, cf.sigma),
                     TruncationInterval(cf.lower, cf.upper),
                     PrivacyBudget(cf.eps));
    double w = cf.upper - cf.lower;
    double h = 1e-8 * w;
    struct Seam {
      double at;
      PsiBranch left, right;
    };
    const Seam seams[] = {
        {cf.lower, PsiBranch::kBelowLower, PsiBranch::kInterior},
        {cf.upper, PsiBranch::kInterior, PsiBranch::kAboveUpper},
    };
    for (const Seam& seam : seams) {
      // The jump of the piecewise definition at the seam, per quantity.
      PsiValues left = psi_branch(seam.at, seam.left, config);
      PsiValues right = psi_branch(seam.at, seam.right, config);
      double jumps[3] = {std::abs(left.value - right.value),
                         std::abs(left.d1 - right.d1),
                         std::abs(left.d2 - right.d2)};
      // Dispatcher straddle with the smooth variation removed: what remains
      // of psi(b+h) - psi(b-h) after subtracting 2 h psi' is the seam jump
      // plus an O(h^2) Taylor remainder far below tolerance.  The function
      // is C^2, not C^3, so the psi'' straddle must grant each half-step its
      // own branch's third derivative (estimated by in-branch differences;
      // the closed forms extend smoothly past the seam).
      PsiValues lo = psi_all(seam.at - h, config);
      PsiValues hi = psi_all(seam.at + h, config);
      PsiValues mid = psi_all(seam.at, config);
      double delta = 1e-4 * w;
      auto branch_d3 = [&](PsiBranch b) {
        return (psi_branch(seam.at + delta, b, config).d2 -
                psi_branch(seam.at - delta, b, config).d2) /
               (2.0 * delta);
      };
      double straddle[3] = {
          std::abs(hi.value - lo.value - 2.0 * h * mid.d1),
          std::abs(hi.d1 - lo.d1 - 2.0 * h * mid.d2),
          std::abs(hi.d2 - lo.d2 -
                   h * (branch_d3(seam.left) + branch_d3(seam.right))),
      };
      for (int q = 0; q < 3; ++q) {
        worst = std::max({worst, jumps[q], straddle[q]});
        if (jumps[q] > 1e-9 || straddle[q] > 1e-9) {
          c.pass = false;
          const char* names[] = {"psi", "psi'", "psi''"};
          c.detail = std::string(names[q]) + " jump " + fmt(jumps[q]) +
                     " / straddle " + fmt(straddle[q]) + " at seam " +
                     fmt(seam.at) + " (alpha " + fmt(cf.alpha) + ", sigma " +
                     fmt(cf.sigma) + ", eps " + fmt(cf.eps) + ")";
        }
      }
    }
  }
  if (c.pass) {
    c.detail =
        "12 configurations, both seams, psi/psi'/psi'': all seam jumps and "
        "slope-corrected h=1e-8(u-l) straddles <= 1e-9 (worst " +
        fmt(worst) + ")";
  }
  return c;
}

// ---------------------------------------------------------------------------

std::vector<PublicObservation> gen_public(long n, const Eigen::VectorXd& beta,
                                          const PsiConfig& config,
                                          uint64_t id) {
  std::vector<PublicObservation> data(n);
  RandomStream s(kMasterSeed, 0x64617461u, id);
  for (long i = 0; i < n; ++i) {
    data[i].x = sample_design_x(static_cast<int>(beta.size()), s);
    double y = truncate(ald_sample(beta.dot(data[i].x), config.model(), s),
                        config.interval());
    data[i].z = bitflip_sample(y, config.interval(), config.budget(), s);
  }
  return data;
}

std::vector<PrivateObservation> gen_private(long n,
                                            const Eigen::VectorXd& beta,
                                            const PsiConfig& config,
                                            const PrivacyBudget& per,
                                            uint64_t id) {
  int k = static_cast<int>(beta.size());
  std::vector<TruncationInterval> ivs(k, TruncationInterval(-1.0, 1.0));
  RandomStream s(kMasterSeed, 0x64617462u, id);
  std::vector<PrivateObservation> data(n);
  std::vector<double> xbuf(k);
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd x(k);
    for (int j = 0; j < k; ++j) x[j] = s.rademacher();
    double y = truncate(ald_sample(beta.dot(x), config.model(), s),
                        config.interval());
    data[i].zy = bitflip_sample(y, config.interval(), per, s);
    for (int j = 0; j < k; ++j) xbuf[j] = x[j];
    data[i].zx = encode_x_private(xbuf, ivs, per, s);
  }
  return data;
}

template <typename Likelihood>
bool check_derivatives(const Likelihood& lik, const Eigen::VectorXd& beta,
                       double& grad_err, double& hess_err) {
  int d = static_cast<int>(beta.size());
  Eigen::VectorXd grad = lik.gradient(beta);
  Eigen::MatrixXd hess = lik.hessian(beta);
  Eigen::VectorXd fd_grad(d);
  Eigen::MatrixXd fd_hess(d, d);
  for (int j = 0; j < d; ++j) {
    double h = 1e-5 * std::max(1.0, std::abs(beta[j]));
    Eigen::VectorXd bp = beta, bm = beta;
    bp[j] += h;
    bm[j] -= h;
    fd_grad[j] = (lik.value(bp) - lik.value(bm)) / (2.0 * h);
    fd_hess.col(j) = (lik.gradient(bp) - lik.gradient(bm)) / (2.0 * h);
  }
  grad_err = std::max(grad_err,
                      (grad - fd_grad).template lpNorm<Eigen::Infinity>() /
                          std::max(1.0, grad.template lpNorm<Eigen::Infinity>()));
  Eigen::MatrixXd sym = 0.5 * (fd_hess + fd_hess.transpose());
  hess_err = std::max(hess_err,
                      (hess - sym).norm() / std::max(1.0, hess.norm()));
  return true;
}

Check derivative_consistency_check() {
  Check c{"derivative-consistency"};
  double grad_err = 0.0, hess_err = 0.0;

  RandomStream pick(kMasterSeed, 0x66640000u);
  for (int i = 0; i < 10; ++i) {
    int d = 1 + i % 3;
    PsiConfig config(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                     PrivacyBudget(i % 2 ? 5.0 : 2.5));
    Eigen::VectorXd beta_star(d), beta(d);
    for (int j = 0; j < d; ++j) {
      beta_star[j] = pick.uniform(-0.8, 0.8);
      beta[j] = pick.uniform(-1.0, 1.0);
    }
    auto data = gen_public(200 + 17 * i, beta_star, config,
                           static_cast<uint64_t>(i));
    PublicLikelihood lik(data, config);
    check_derivatives(lik, beta, grad_err, hess_err);
  }

  for (int i = 0; i < 10; ++i) {
    int k = 1 + i % 2;
    PrivacyBudget per = split_budget(PrivacyBudget(i % 2 ? 5.0 : 2.5), k);
    PsiConfig config(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                     per);
    auto prior = std::make_shared<RademacherPrior>(k);
    Eigen::VectorXd beta_star(k), beta(k);
    for (int j = 0; j < k; ++j) {
      beta_star[j] = pick.uniform(-0.8, 0.8);
      beta[j] = pick.uniform(-1.0, 1.0);
    }
    auto data = gen_private(150, beta_star, config, per,
                            static_cast<uint64_t>(100 + i));
    PrivateLikelihood lik(data, config, per, prior);
    check_derivatives(lik, beta, grad_err, hess_err);
  }

  c.pass = grad_err <= 1e-5 && hess_err <= 1e-4;
  c.detail =
      "10 public + 10 private instances; worst relative gradient error " +
      fmt(grad_err) + " (limit 1e-5), Hessian " + fmt(hess_err) +
      " (limit 1e-4)";
  return c;
}

// ---------------------------------------------------------------------------

// Brute-force mixture sums in long double, written directly from the prior
// definition; shares no accumulation code with phi_all.
void phi_oracle(const Eigen::VectorXd& beta, const std::vector<int>& zx,
                const PsiConfig& config, const PrivacyBudget& per,
                double& value, Eigen::VectorXd& d1, Eigen::MatrixXd& d2) {
  const double shrink = std::exp(-1e-6);
  int k = static_cast<int>(zx.size());
  double eps = per.epsilon();
  long double q_denom = std::pow(std::exp(eps) + 1.0, k);
  long double num = 0.0L, den = 0.0L;
  std::vector<long double> num1(k, 0.0L), num2(k * k, 0.0L);
  for (long idx = 0; idx < (1L << k); ++idx) {
    Eigen::VectorXd x(k);
    int match = 0;
    for (int j = 0; j < k; ++j) {
      x[j] = (idx >> j) & 1 ? 1.0 : -1.0;
      if (static_cast<int>(x[j]) == zx[j]) ++match;
    }
    long double q = std::exp(eps * match) / q_denom;
    PsiValues p = psi_all(beta.dot(x), config);
    num += q * p.value;
    den += q;
    for (int a = 0; a < k; ++a) {
      num1[a] += q * p.d1 * x[a];
      for (int b = 0; b < k; ++b) num2[a * k + b] += q * p.d2 * x[a] * x[b];
    }
  }
  value = shrink * static_cast<double>(num / den);
  d1.resize(k);
  d2.resize(k, k);
  for (int a = 0; a < k; ++a) {
    d1[a] = shrink * static_cast<double>(num1[a] / den);
    for (int b = 0; b < k; ++b) {
      d2(a, b) = shrink * static_cast<double>(num2[a * k + b] / den);
    }
  }
}

Check phi_enumeration_check() {
  Check c{"phi-enumeration"};
  double worst = 0.0;
  long cases = 0;
  RandomStream pick(kMasterSeed, 0x70686901u);
  for (int k = 1; k <= 6; ++k) {
    RademacherPrior prior(k);
    for (double eps_total : {1.0, 2.5}) {
      PrivacyBudget per = split_budget(PrivacyBudget(eps_total), k);
      PsiConfig config(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                       per);
      for (int rep = 0; rep < 3; ++rep) {
        Eigen::VectorXd beta(k);
        std::vector<int> zx(k);
        for (int j = 0; j < k; ++j) {
          beta[j] = rep == 0 ? 0.0 : pick.uniform(-1.5, 1.5);
          zx[j] = rep == 0 ? 1 : pick.rademacher();
        }
        double ov;
        Eigen::VectorXd od1;
        Eigen::MatrixXd od2;
        phi_oracle(beta, zx, config, per, ov, od1, od2);
        PhiValues got = phi_all(beta, zx, config, prior, per);
        worst = std::max(worst, std::abs(got.value - ov));
        worst = std::max(worst, (got.d1 - od1).lpNorm<Eigen::Infinity>());
        worst = std::max(
            worst, (got.d2 - od2).cwiseAbs().maxCoeff());
        ++cases;
      }
    }
  }
  c.pass = worst <= 1e-12;
  c.detail = std::to_string(cases) +
             " (d, eps, beta, zx) cases up to d=6; worst |phi - oracle| "
             "across value and both derivatives " +
             fmt(worst) + " (limit 1e-12)";
  return c;
}

// ---------------------------------------------------------------------------

Check sandwich_calibration_check() {
  Check c{"sandwich-calibration"};
  Eigen::VectorXd beta_star(2);
  beta_star << 0.5, -0.3;
  PsiConfig config(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                   PrivacyBudget(2.5));

  // Plug-in limit covariance at the truth.  At the correct model the
  // sandwich reduces to the inverse Fisher information; integrate it with a
  // 48x48 tensor Gauss-Legendre rule (exact to machine precision here).
  std::vector<double> nodes, weights;
  gauss_legendre(48, nodes, weights);
  Eigen::MatrixXd points(48L * 48L, 2);
  Eigen::VectorXd w(48L * 48L);
  long row = 0;
  for (int i = 0; i < 48; ++i) {
    for (int j = 0; j < 48; ++j, ++row) {
      points(row, 0) = nodes[i];
      points(row, 1) = nodes[j];
      w[row] = weights[i] * weights[j];
    }
  }
  Eigen::MatrixXd fisher =
      fisher_correct_model_grid(beta_star, config, points, w);
  Eigen::MatrixXd c_star = fisher.inverse();

  // 300 independent fits at n = 1e5.
  SyntheticSource src;
  src.beta_star = beta_star;
  SweepSpec spec(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                 DataSource(src));
  spec.n_values = {100000};
  spec.epsilon_values = {2.5};
  spec.repetitions = 300;
  spec.fit_config.box = ParameterBox::cube(2, 10.0);
  spec.fit_config.n_starts = 2;
  spec.seed = kMasterSeed + 8;
  SweepResult res = covariance_sweep(spec);
  Eigen::MatrixXd scaled = 100000.0 * res.cells[0].covariance;

  double rel = (scaled - c_star).norm() / c_star.norm();
  c.pass = rel <= 0.30 && res.cells[0].failures == 0;
  c.detail = "||1e5 Cov_300 - C(beta*)||_F / ||C(beta*)||_F = " + fmt(rel) +
             " (limit 0.3); C(beta*) trace " + fmt(c_star.trace()) +
             ", empirical trace " + fmt(scaled.trace());
  return c;
}

// ---------------------------------------------------------------------------

Check fisher_spot_check() {
  Check c{"nonprivate-fisher-spot"};
  Eigen::MatrixXd exx = Eigen::MatrixXd::Identity(2, 2) / 3.0;
  Eigen::MatrixXd f = fisher_nonprivate(QuantileModel(0.3, 1.0), exx);
  double literal = 0.07;
  double ulp = std::nextafter(literal, 1.0) - literal;
  double diag_err = std::max(std::abs(f(0, 0) - literal),
                             std::abs(f(1, 1) - literal));
  c.pass = diag_err <= ulp && f(0, 1) == 0.0 && f(1, 0) == 0.0 &&
           f(0, 0) == f(1, 1);
  c.detail = "diagonal " + fmt(f(0, 0)) + " vs 0.07: difference " +
             fmt(diag_err) + " (<= 1 ulp = " + fmt(ulp) +
             "), off-diagonal exactly 0";
  return c;
}

// ---------------------------------------------------------------------------

Check bias_persistence_check() {
  Check c{"bias-persistence"};
  SyntheticSource src;
  src.beta_star = Eigen::VectorXd(2);
  src.beta_star << 0.5, -0.3;
  src.design = DesignKind::kRademacher;
  SweepSpec spec(QuantileModel(0.3, 1.0), TruncationInterval(-2.0, 2.0),
                 DataSource(src));
  spec.scenario = Scenario::kPrivate;
  spec.x_intervals = {TruncationInterval(-1.0, 1.0),
                      TruncationInterval(-1.0, 1.0)};
  spec.n_values = {1000, 4000, 16000};
  spec.epsilon_values = {2.5};
  spec.repetitions = 200;
  spec.fit_config.box = ParameterBox::cube(2, 10.0);
  spec.fit_config.n_starts = 2;
  spec.seed = kMasterSeed + 9;

  BiasResult res = bias_compare(spec, 16000);
  double slope = res.slope_by_epsilon[0];
  double se = res.slope_se_by_epsilon[0];
  double z = std::abs(slope) / se;
  c.pass = std::isfinite(z) && z <= 3.0;
  std::string biases;
  for (const BiasCell& cell : res.cells) {
    biases += " " + fmt(cell.bias_norm);
  }
  c.detail = "private-vs-proxy bias norms over n {1000,4000,16000}:" +
             biases + "; slope " + fmt(slope) + " +- " + fmt(se) + " (|z| = " +
             fmt(z) + ", limit 3)";
  return c;
}

// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Check cli_determinism_check(const std::string& cli) {
  Check c{"cli-determinism"};
  if (cli.empty()) {
    c.detail = "no CLI binary path supplied on the command line";
    return c;
  }
  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() /
                  ("ldpq_accept_" + std::to_string(::getpid()));
  fs::remove_all(base);
  fs::create_directories(base);
  std::string cfg = (base / "cfg.json").string();
  {
    std::ofstream out(cfg);
    out << "{\"n_values\": [200, 400], \"epsilon_values\": [1.0, 2.5],\n"
        << " \"repetitions\": 4, \"beta_star\": [0.8],\n"
        << " \"box_halfwidth\": 10, \"n_starts\": 1}\n";
  }
  auto run = [&](const std::string& args) {
    std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  std::string d1 = (base / "t1").string();
  std::string d2 = (base / "t1_again").string();
  std::string d8 = (base / "t8").string();
  bool ok =
      run("cov-sweep --config " + cfg + " --seed 5 --threads 1 --out " + d1) ==
          0 &&
      run("cov-sweep --config " + cfg + " --seed 5 --threads 1 --out " + d2) ==
          0 &&
      run("cov-sweep --config " + cfg + " --seed 5 --threads 8 --out " + d8) ==
          0;
  if (!ok) {
    c.detail = "CLI sweep invocation failed";
    return c;
  }
  c.pass = true;
  for (const char* name : {"sweep.csv", "sweep_cells.csv", "manifest.json"}) {
    std::string a = slurp(d1 + "/" + name);
    if (a.empty() || a != slurp(d2 + "/" + name) ||
        a != slurp(d8 + "/" + name)) {
      c.pass = false;
      c.detail = std::string(name) + " differs across reruns/thread counts";
    }
  }
  // Repeatability of a fit run as well.
  std::string f1 = (base / "f1").string();
  std::string f2 = (base / "f2").string();
  if (run("fit-public --seed 7 --out " + f1) != 0 ||
      run("fit-public --seed 7 --out " + f2) != 0 ||
      slurp(f1 + "/fit.json").empty() ||
      slurp(f1 + "/fit.json") != slurp(f2 + "/fit.json")) {
    c.pass = false;
    c.detail = "fit.json differs between identical fit-public runs";
  }
  if (c.pass) {
    c.detail =
        "cov-sweep outputs byte-identical across reruns and --threads 1/8; "
        "fit-public reruns byte-identical";
  }
  fs::remove_all(base);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = argc > 1 ? argv[1] : "";
  std::vector<Check> results;

  auto guard = [&](const std::string& name, auto fn) {
    try {
      results.push_back(fn());
    } catch (const std::exception& e) {
      results.push_back(
          Check{name, false, std::string("exception: ") + e.what()});
    }
    report(results.back());
  };

  std::cout << "acceptance gate: " << 11
            << " checks, expect 10-20 minutes single-core" << std::endl;

  try {
    covariance_sweep_checks(results);
  } catch (const std::exception& e) {
    results.push_back(Check{"covariance-decay", false,
                            std::string("exception: ") + e.what()});
    report(results.back());
    results.push_back(Check{"epsilon-monotonicity", false,
                            std::string("exception: ") + e.what()});
    report(results.back());
  }

  guard("ldp-audit", audit_check);
  guard("psi-vs-simulation", psi_simulation_check);
  guard("boundary-continuity", boundary_continuity_check);
  guard("derivative-consistency", derivative_consistency_check);
  guard("phi-enumeration", phi_enumeration_check);
  guard("sandwich-calibration", sandwich_calibration_check);
  guard("nonprivate-fisher-spot", fisher_spot_check);
  guard("bias-persistence", bias_persistence_check);
  guard("cli-determinism", [&] { return cli_determinism_check(cli); });

  int failures = 0;
  for (const Check& c : results) failures += c.pass ? 0 : 1;
  std::cout << (failures == 0 ? "all checks passed"
                              : std::to_string(failures) + " check(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}

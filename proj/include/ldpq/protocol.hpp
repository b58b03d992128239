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

#ifndef LDPQ_PROTOCOL_HPP_
#define LDPQ_PROTOCOL_HPP_

#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ldpq/likelihood_private.hpp"
#include "ldpq/likelihood_public.hpp"
#include "ldpq/mechanisms.hpp"
#include "ldpq/quantile_model.hpp"

namespace ldpq {

enum class DesignKind { kUniform, kUniformWithIntercept, kRademacher };

// Generates user covariates from `design` and responses from the working
// model at beta_star (the correct-model setting).
struct SyntheticSource {
  Eigen::VectorXd beta_star;
  DesignKind design = DesignKind::kUniform;
};

// Fixed rows; user i reads row i.  Must hold at least n_users rows.
struct EmpiricalSource {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

using DataSource = std::variant<SyntheticSource, EmpiricalSource>;

int source_dim(const DataSource& source);

struct ProtocolConfig {
  long n_users;
  PrivacyBudget epsilon;
  TruncationInterval y_interval;
  // Per-coordinate truncation intervals; required for the private-X protocol
  // and ignored by the public-X one.
  std::vector<TruncationInterval> x_intervals;
  QuantileModel model;
  unsigned long long seed = 0;
};

struct PublicProtocolResult {
  std::vector<PublicObservation> observations;
  // Total bits of user payload: one response bit per user.
  long user_payload_bits = 0;
};

struct PrivateProtocolResult {
  std::vector<PrivateObservation> observations;
  // (k + 1) bits per user: k covariate bits plus the response bit.
  long user_payload_bits = 0;
};

// Each user i owns the stream (cfg.seed, user tag, i); their released bits
// depend only on their own record and that stream, so the protocol is
// non-interactive.  The user_order overloads process users in the given
// permutation and must produce identical output; they exist to let tests
// certify that property.
PublicProtocolResult run_protocol_public(const DataSource& source,
                                         const ProtocolConfig& cfg);
PublicProtocolResult run_protocol_public(const DataSource& source,
                                         const ProtocolConfig& cfg,
                                         std::span<const long> user_order);
PrivateProtocolResult run_protocol_private(const DataSource& source,
                                           const ProtocolConfig& cfg);
PrivateProtocolResult run_protocol_private(const DataSource& source,
                                           const ProtocolConfig& cfg,
                                           std::span<const long> user_order);

// The raw sample the same users would hold before any release: row i of the
// result uses exactly the leading draws of user i's stream, so it coincides
// with the covariates and responses inside the two protocols above.  This is
// what the non-private benchmark estimator consumes.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> draw_raw_sample(
    const DataSource& source, const ProtocolConfig& cfg);

struct LdpAuditResult {
  double max_ratio = 0.0;
  long pairs_checked = 0;
  long outputs_checked = 0;
};

// Analytic privacy audits: enumerate record pairs (including interval corners
// and out-of-range values, which truncation clamps) and bound the likelihood
// ratio of every observable output.  Probabilities are evaluated in a
// cancellation-free form so the corner supremum e^eps is reproduced to a few
// ulps rather than drowned in rounding error.  The private audit enumerates
// all 2^(k+1) outputs per pair.
LdpAuditResult ldp_audit_public(const TruncationInterval& y_interval,
                                const PrivacyBudget& budget,
                                long min_pairs = 100);
LdpAuditResult ldp_audit_private(const TruncationInterval& y_interval,
                                 std::span<const TruncationInterval> x_intervals,
                                 const PrivacyBudget& budget,
                                 long min_pairs = 100);

}  // namespace ldpq

#endif  // LDPQ_PROTOCOL_HPP_

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

#include "ldpq/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ldpq/errors.hpp"
#include "ldpq/random.hpp"

namespace ldpq {

namespace {

constexpr unsigned long long kUserStreamTag = 0x757372u;  // "usr"

void validate_config(const DataSource& source, const ProtocolConfig& cfg,
                     bool needs_x_intervals) {
  if (cfg.n_users < 1) {
    throw ConfigError("protocol: n_users must be positive");
  }
  const int dim = source_dim(source);
  if (needs_x_intervals &&
      static_cast<int>(cfg.x_intervals.size()) != dim) {
    throw ConfigError(
        "protocol: private runs need one x interval per coordinate");
  }
  if (const auto* emp = std::get_if<EmpiricalSource>(&source)) {
    if (emp->x.rows() != emp->y.size()) {
      throw DataError("protocol: empirical X rows != y length");
    }
    if (emp->x.rows() < cfg.n_users) {
      throw DataError("protocol: empirical source shorter than n_users");
    }
  }
}

// Draws user i's covariates and raw response.  The draw order (covariates
// first, then the response) is part of the stream contract relied on by
// draw_raw_sample and by common-random-number couplings in the experiment
// harness; do not reorder.
void draw_user_record(const DataSource& source, const ProtocolConfig& cfg,
                      long user, RandomStream& stream, Eigen::VectorXd& x,
                      double& y) {
  if (const auto* syn = std::get_if<SyntheticSource>(&source)) {
    const int dim = static_cast<int>(syn->beta_star.size());
    x.resize(dim);
    switch (syn->design) {
      case DesignKind::kUniform:
        for (int j = 0; j < dim; ++j) x[j] = stream.uniform(-1.0, 1.0);
        break;
      case DesignKind::kUniformWithIntercept:
        x[0] = 1.0;
        for (int j = 1; j < dim; ++j) x[j] = stream.uniform(-1.0, 1.0);
        break;
      case DesignKind::kRademacher:
        for (int j = 0; j < dim; ++j) {
          x[j] = static_cast<double>(stream.rademacher());
        }
        break;
    }
    y = ald_sample(syn->beta_star.dot(x), cfg.model, stream);
  } else {
    const auto& emp = std::get<EmpiricalSource>(source);
    x = emp.x.row(user).transpose();
    y = emp.y[user];
  }
}

std::vector<long> identity_order(long n) {
  std::vector<long> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0L);
  return order;
}

void validate_order(std::span<const long> order, long n) {
  if (static_cast<long>(order.size()) != n) {
    throw ConfigError("protocol: user_order must list every user once");
  }
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (const long u : order) {
    if (u < 0 || u >= n || seen[static_cast<size_t>(u)]) {
      throw ConfigError("protocol: user_order is not a permutation");
    }
    seen[static_cast<size_t>(u)] = 1;
  }
}

// One bit-flip probability factor in a cancellation-free decomposition.
// With t = (v - mid)/width in [-1/2, 1/2], the acceptance probability of the
// matching output is (C + 2t)/(2C) and of the opposite output (C - 2t)/(2C).
// Writing C - 1 = 2/(e^eps - 1) exactly (expm1) keeps the small factor
// C +- 2t accurate near the corners where it approaches C - 1.
struct AuditFactor {
  double c_minus_one;  // 2 / expm1(eps)
  double two_c;

  explicit AuditFactor(const PrivacyBudget& budget)
      : c_minus_one(2.0 / std::expm1(budget.epsilon())),
        two_c(2.0 * budget.c_epsilon()) {}

  // Probability numerator C + s*2t (s = +1 for the output the value leans
  // toward).  The 2C denominator cancels in every audited ratio, so ratios
  // use numerators directly.
  double numerator(double t, double sign) const {
    // C + s*2t = (C - 1) + (1 + s*2t); both addends are nonnegative and
    // neither involves cancellation for |t| <= 1/2.
    return c_minus_one + (1.0 + sign * 2.0 * t);
  }
};

double scaled_position(double raw, const TruncationInterval& interval) {
  const double v = truncate(raw, interval);
  return (v - interval.midpoint()) / interval.width();
}

// Deterministic audit values for one interval: both corners, out-of-range
// values on both sides (exercising truncation), and an interior grid.
std::vector<double> audit_values(const TruncationInterval& interval,
                                 int count) {
  std::vector<double> values;
  values.reserve(static_cast<size_t>(count));
  const double w = interval.width();
  values.push_back(interval.lower() - w);
  values.push_back(interval.upper() + w);
  const int grid = count - 2;
  for (int i = 0; i < grid; ++i) {
    values.push_back(interval.lower() +
                     w * static_cast<double>(i) / (grid - 1));
  }
  return values;
}

}  // namespace

int source_dim(const DataSource& source) {
  if (const auto* syn = std::get_if<SyntheticSource>(&source)) {
    if (syn->beta_star.size() == 0) {
      throw ConfigError("protocol: synthetic source has empty beta_star");
    }
    return static_cast<int>(syn->beta_star.size());
  }
  const auto& emp = std::get<EmpiricalSource>(source);
  if (emp.x.cols() == 0) {
    throw ConfigError("protocol: empirical source has no covariate columns");
  }
  return static_cast<int>(emp.x.cols());
}

PublicProtocolResult run_protocol_public(const DataSource& source,
                                         const ProtocolConfig& cfg) {
  const std::vector<long> order = identity_order(cfg.n_users);
  return run_protocol_public(source, cfg, order);
}

PublicProtocolResult run_protocol_public(const DataSource& source,
                                         const ProtocolConfig& cfg,
                                         std::span<const long> user_order) {
  validate_config(source, cfg, /*needs_x_intervals=*/false);
  validate_order(user_order, cfg.n_users);

  PublicProtocolResult result;
  result.observations.resize(static_cast<size_t>(cfg.n_users));
  Eigen::VectorXd x;
  double y = 0.0;
  for (const long user : user_order) {
    RandomStream stream(cfg.seed, kUserStreamTag,
                        static_cast<unsigned long long>(user));
    draw_user_record(source, cfg, user, stream, x, y);
    const double v = truncate(y, cfg.y_interval);
    PublicObservation& obs = result.observations[static_cast<size_t>(user)];
    obs.x = x;
    obs.z = bitflip_sample(v, cfg.y_interval, cfg.epsilon, stream);
  }
  result.user_payload_bits = cfg.n_users;
  return result;
}

PrivateProtocolResult run_protocol_private(const DataSource& source,
                                           const ProtocolConfig& cfg) {
  const std::vector<long> order = identity_order(cfg.n_users);
  return run_protocol_private(source, cfg, order);
}

PrivateProtocolResult run_protocol_private(const DataSource& source,
                                           const ProtocolConfig& cfg,
                                           std::span<const long> user_order) {
  validate_config(source, cfg, /*needs_x_intervals=*/true);
  validate_order(user_order, cfg.n_users);
  const int dim = source_dim(source);
  const PrivacyBudget per_release = split_budget(cfg.epsilon, dim);

  PrivateProtocolResult result;
  result.observations.resize(static_cast<size_t>(cfg.n_users));
  Eigen::VectorXd x;
  double y = 0.0;
  std::vector<double> x_raw(static_cast<size_t>(dim));
  for (const long user : user_order) {
    RandomStream stream(cfg.seed, kUserStreamTag,
                        static_cast<unsigned long long>(user));
    draw_user_record(source, cfg, user, stream, x, y);
    PrivateObservation& obs = result.observations[static_cast<size_t>(user)];
    const double v = truncate(y, cfg.y_interval);
    obs.zy = bitflip_sample(v, cfg.y_interval, per_release, stream);
    for (int j = 0; j < dim; ++j) x_raw[static_cast<size_t>(j)] = x[j];
    obs.zx = encode_x_private(x_raw, cfg.x_intervals, per_release, stream);
  }
  result.user_payload_bits = cfg.n_users * (dim + 1);
  return result;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> draw_raw_sample(
    const DataSource& source, const ProtocolConfig& cfg) {
  validate_config(source, cfg, /*needs_x_intervals=*/false);
  const int dim = source_dim(source);
  Eigen::MatrixXd xs(cfg.n_users, dim);
  Eigen::VectorXd ys(cfg.n_users);
  Eigen::VectorXd x;
  double y = 0.0;
  for (long user = 0; user < cfg.n_users; ++user) {
    RandomStream stream(cfg.seed, kUserStreamTag,
                        static_cast<unsigned long long>(user));
    draw_user_record(source, cfg, user, stream, x, y);
    xs.row(user) = x.transpose();
    ys[user] = y;
  }
  return {std::move(xs), std::move(ys)};
}

LdpAuditResult ldp_audit_public(const TruncationInterval& y_interval,
                                const PrivacyBudget& budget, long min_pairs) {
  if (min_pairs < 1) throw ConfigError("ldp_audit_public: min_pairs < 1");
  // V values give V(V-1) ordered pairs; grow V until that covers min_pairs.
  int count = 12;
  while (static_cast<long>(count) * (count - 1) < min_pairs) ++count;
  const std::vector<double> values = audit_values(y_interval, count);

  const AuditFactor factor(budget);
  LdpAuditResult out;
  for (size_t a = 0; a < values.size(); ++a) {
    for (size_t b = 0; b < values.size(); ++b) {
      if (a == b) continue;
      const double ta = scaled_position(values[a], y_interval);
      const double tb = scaled_position(values[b], y_interval);
      for (const double sign : {1.0, -1.0}) {
        const double ratio =
            factor.numerator(ta, sign) / factor.numerator(tb, sign);
        out.max_ratio = std::max(out.max_ratio, ratio);
        ++out.outputs_checked;
      }
      ++out.pairs_checked;
    }
  }
  return out;
}

LdpAuditResult ldp_audit_private(const TruncationInterval& y_interval,
                                 std::span<const TruncationInterval> x_intervals,
                                 const PrivacyBudget& budget, long min_pairs) {
  if (min_pairs < 1) throw ConfigError("ldp_audit_private: min_pairs < 1");
  const int k = static_cast<int>(x_intervals.size());
  if (k < 1) throw ConfigError("ldp_audit_private: need x intervals");
  if (k + 1 > 24) {
    throw CapabilityError("ldp_audit_private: output enumeration too large");
  }

  int n_records = 16;
  while (static_cast<long>(n_records) * (n_records - 1) < min_pairs) {
    ++n_records;
  }

  // Deterministic record list: opposite all-corner records (where the
  // supremum e^eps is attained), all-out-of-range records on both sides, and
  // a seeded fill.  Each record is (x_1..x_k, y) in scaled position form.
  std::vector<std::vector<double>> records;
  records.reserve(static_cast<size_t>(n_records));
  const auto scaled_record = [&](const std::vector<double>& raw) {
    std::vector<double> t(static_cast<size_t>(k) + 1);
    for (int j = 0; j < k; ++j) {
      t[static_cast<size_t>(j)] =
          scaled_position(raw[static_cast<size_t>(j)], x_intervals[j]);
    }
    t[static_cast<size_t>(k)] = scaled_position(raw[static_cast<size_t>(k)],
                                                y_interval);
    return t;
  };
  {
    std::vector<double> lo(static_cast<size_t>(k) + 1);
    std::vector<double> hi(static_cast<size_t>(k) + 1);
    std::vector<double> below(static_cast<size_t>(k) + 1);
    std::vector<double> above(static_cast<size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) {
      const TruncationInterval& iv = (j < k) ? x_intervals[j] : y_interval;
      lo[static_cast<size_t>(j)] = iv.lower();
      hi[static_cast<size_t>(j)] = iv.upper();
      below[static_cast<size_t>(j)] = iv.lower() - iv.width();
      above[static_cast<size_t>(j)] = iv.upper() + iv.width();
    }
    records.push_back(scaled_record(lo));
    records.push_back(scaled_record(hi));
    records.push_back(scaled_record(below));
    records.push_back(scaled_record(above));
  }
  RandomStream fill(0xA0D17u, 0x61756469u);  // fixed audit seed
  while (static_cast<int>(records.size()) < n_records) {
    std::vector<double> raw(static_cast<size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) {
      const TruncationInterval& iv = (j < k) ? x_intervals[j] : y_interval;
      raw[static_cast<size_t>(j)] =
          fill.uniform(iv.lower() - 0.25 * iv.width(),
                       iv.upper() + 0.25 * iv.width());
    }
    records.push_back(scaled_record(raw));
  }

  const PrivacyBudget per_release = split_budget(budget, k);
  const AuditFactor factor(per_release);
  const long n_outputs = 1L << (k + 1);

  LdpAuditResult out;
  for (size_t a = 0; a < records.size(); ++a) {
    for (size_t b = 0; b < records.size(); ++b) {
      if (a == b) continue;
      for (long mask = 0; mask < n_outputs; ++mask) {
        // Bits 0..k-1 pick each coordinate's released sign, bit k the
        // response bit; the per-release 2C denominators cancel between the
        // two records, leaving a product of numerator ratios.
        double ratio = 1.0;
        for (int j = 0; j <= k; ++j) {
          const double sign = ((mask >> j) & 1L) ? 1.0 : -1.0;
          ratio *= factor.numerator(records[a][static_cast<size_t>(j)], sign) /
                   factor.numerator(records[b][static_cast<size_t>(j)], sign);
        }
        out.max_ratio = std::max(out.max_ratio, ratio);
        ++out.outputs_checked;
      }
      ++out.pairs_checked;
    }
  }
  return out;
}

}  // namespace ldpq

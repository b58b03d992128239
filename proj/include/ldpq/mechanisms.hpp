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

#ifndef LDPQ_MECHANISMS_HPP_
#define LDPQ_MECHANISMS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ldpq/random.hpp"

namespace ldpq {

// Privacy budget epsilon > 0 for an epsilon-locally-private randomizer: for
// every pair of inputs, the output distributions have likelihood ratio at
// most e^epsilon.
class PrivacyBudget {
 public:
  explicit PrivacyBudget(double epsilon);
  double epsilon() const { return epsilon_; }
  // (e^eps + 1) / (e^eps - 1); the scale constant of the one-bit randomizer.
  double c_epsilon() const { return c_epsilon_; }

 private:
  double epsilon_;
  double c_epsilon_;
};

// Closed interval [lower, upper] with lower < upper, both finite.  Endpoints
// are valid values.
class TruncationInterval {
 public:
  TruncationInterval(double lower, double upper);
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double width() const { return upper_ - lower_; }
  double midpoint() const { return 0.5 * (upper_ + lower_); }
  bool contains(double v) const { return v >= lower_ && v <= upper_; }
  double clamp(double v) const;

 private:
  double lower_;
  double upper_;
};

// One transmitted bit.  Stored as {0, 1}; the signed view 2v - 1 in {-1, +1}
// is what the explanatory-variable mechanism transmits.
class Bit {
 public:
  explicit Bit(int value);
  static Bit from_signed(int pm);
  int value() const { return value_; }
  int signed_value() const { return 2 * value_ - 1; }
  friend bool operator==(Bit a, Bit b) { return a.value_ == b.value_; }

 private:
  uint8_t value_;
};

// Clamps y into the interval.  Non-finite y is rejected (DataError): the
// mechanism's privacy guarantee is stated for real-valued inputs only.
double truncate(double y, const TruncationInterval& interval);

// P(bit = 1 | v) = 1/2 + (v - midpoint) / (width * C_eps) for v in the
// interval (DataError otherwise).  Linear in v, bounded away from {0, 1} by
// [1/(e^eps + 1), e^eps/(e^eps + 1)].
double bitflip_prob_plus(double v, const TruncationInterval& interval,
                         const PrivacyBudget& budget);

// Complement; computed as 1 - bitflip_prob_plus so the two sum to 1 exactly.
double bitflip_prob_minus(double v, const TruncationInterval& interval,
                          const PrivacyBudget& budget);

// One draw of the randomized bit for a truncated value v.  Consumes exactly
// one uniform from the stream.
Bit bitflip_sample(double v, const TruncationInterval& interval,
                   const PrivacyBudget& budget, RandomStream& stream);

// Sequential composition: each of k + 1 one-bit releases gets eps / (k + 1),
// so the whole record release satisfies epsilon-LDP.  k >= 1 (ConfigError
// otherwise).
PrivacyBudget split_budget(const PrivacyBudget& total, int k);

// Affine map of [lower, upper] onto [-1, 1].
double rescale_to_unit(double v, const TruncationInterval& interval);

// Per-coordinate release of an explanatory vector: truncate each coordinate
// into its interval, rescale to [-1, 1], and flip each coordinate
// independently with budget per_coordinate.  Returns signs in {-1, +1}^k.
// Consumes exactly x.size() uniforms, in coordinate order.
std::vector<int> encode_x_private(
    std::span<const double> x,
    std::span<const TruncationInterval> coordinate_intervals,
    const PrivacyBudget& per_coordinate, RandomStream& stream);

}  // namespace ldpq

#endif  // LDPQ_MECHANISMS_HPP_

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

#include "ldpq/mechanisms.hpp"

#include <cmath>
#include <string>

#include "ldpq/errors.hpp"

namespace ldpq {

PrivacyBudget::PrivacyBudget(double epsilon) : epsilon_(epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    throw ConfigError("privacy budget epsilon must be finite and > 0, got " +
                      std::to_string(epsilon));
  }
  c_epsilon_ = (std::exp(epsilon) + 1.0) / std::expm1(epsilon);
}

TruncationInterval::TruncationInterval(double lower, double upper)
    : lower_(lower), upper_(upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    throw ConfigError("truncation interval needs finite lower < upper, got [" +
                      std::to_string(lower) + ", " + std::to_string(upper) +
                      "]");
  }
}

double TruncationInterval::clamp(double v) const {
  if (v < lower_) return lower_;
  if (v > upper_) return upper_;
  return v;
}

Bit::Bit(int value) : value_(static_cast<uint8_t>(value)) {
  if (value != 0 && value != 1) {
    throw ConfigError("bit value must be 0 or 1, got " + std::to_string(value));
  }
}

Bit Bit::from_signed(int pm) {
  if (pm != -1 && pm != 1) {
    throw ConfigError("signed bit must be -1 or +1, got " + std::to_string(pm));
  }
  return Bit(pm == 1 ? 1 : 0);
}

double truncate(double y, const TruncationInterval& interval) {
  if (!std::isfinite(y)) {
    throw DataError("cannot truncate non-finite response value");
  }
  return interval.clamp(y);
}

double bitflip_prob_plus(double v, const TruncationInterval& interval,
                         const PrivacyBudget& budget) {
  if (!interval.contains(v)) {
    throw DataError("bit-flip input " + std::to_string(v) +
                    " lies outside the truncation interval [" +
                    std::to_string(interval.lower()) + ", " +
                    std::to_string(interval.upper()) + "]");
  }
  return 0.5 + (v - interval.midpoint()) /
                   (interval.width() * budget.c_epsilon());
}

double bitflip_prob_minus(double v, const TruncationInterval& interval,
                          const PrivacyBudget& budget) {
  return 1.0 - bitflip_prob_plus(v, interval, budget);
}

Bit bitflip_sample(double v, const TruncationInterval& interval,
                   const PrivacyBudget& budget, RandomStream& stream) {
  return Bit(stream.bernoulli(bitflip_prob_plus(v, interval, budget)) ? 1 : 0);
}

PrivacyBudget split_budget(const PrivacyBudget& total, int k) {
  if (k < 1) {
    throw ConfigError("split_budget requires k >= 1 coordinates, got " +
                      std::to_string(k));
  }
  return PrivacyBudget(total.epsilon() / (k + 1));
}

double rescale_to_unit(double v, const TruncationInterval& interval) {
  return (2.0 * v - (interval.upper() + interval.lower())) / interval.width();
}

std::vector<int> encode_x_private(
    std::span<const double> x,
    std::span<const TruncationInterval> coordinate_intervals,
    const PrivacyBudget& per_coordinate, RandomStream& stream) {
  if (x.size() != coordinate_intervals.size()) {
    throw ConfigError("encode_x_private: " + std::to_string(x.size()) +
                      " coordinates but " +
                      std::to_string(coordinate_intervals.size()) +
                      " truncation intervals");
  }
  static const TruncationInterval kUnit(-1.0, 1.0);
  std::vector<int> signs(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    // The affine rescale of a clamped value can overshoot +-1 by one ulp;
    // fold it back so endpoint inputs stay valid mechanism inputs.
    const double t = kUnit.clamp(
        rescale_to_unit(truncate(x[j], coordinate_intervals[j]),
                        coordinate_intervals[j]));
    signs[j] = bitflip_sample(t, kUnit, per_coordinate, stream).signed_value();
  }
  return signs;
}

}  // namespace ldpq

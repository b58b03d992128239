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

#ifndef LDPQ_NUMERICS_HPP_
#define LDPQ_NUMERICS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ldpq {

// Fixed chunk length for chunk-then-tree reductions.  Sums are accumulated
// per chunk in index order and the chunk partials are combined pairwise, so a
// reduction over n terms is a pure function of the term values and n, never
// of the thread schedule.
inline constexpr long kReduceChunk = 4096;

// Pairwise (tree) sum of a contiguous range, in index order.
double pairwise_sum(std::span<const double> values);

// Pairwise combination of partials of any additive type (double, VectorXd,
// MatrixXd).  Consumes the input vector.
template <typename T>
T tree_reduce(std::vector<T> parts) {
  if (parts.empty()) return T{};
  while (parts.size() > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      parts[out++] = parts[i] + parts[i + 1];
    }
    if (parts.size() % 2 == 1) parts[out++] = parts.back();
    parts.resize(out);
  }
  return parts[0];
}

// Runs fn(i) for i in [0, n).  Work items are claimed dynamically, so
// callers must write results into per-index slots; with that discipline the
// outcome is independent of the thread count.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // from residual variance, n-2 degrees of freedom
};

// Ordinary least squares of y on x.  Requires at least two distinct x.
OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

// Standard error of the OLS slope when each y_i carries its own known
// standard error se_i (propagation through the linear estimator).
double ols_slope_se_propagated(std::span<const double> x,
                               std::span<const double> se);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Formats a double so that it round-trips exactly (shortest form up to 17
// significant digits); used for byte-stable result files.
std::string format_double(double x);

}  // namespace ldpq

#endif  // LDPQ_NUMERICS_HPP_

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

#include "ldpq/numerics.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "ldpq/errors.hpp"

namespace ldpq {

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  if (threads < 1) throw ConfigError("parallel_for: threads must be >= 1");
  const int workers = static_cast<int>(std::min<long>(threads, n));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next(0);
  std::exception_ptr first_error;
  std::atomic<bool> failed(false);
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) std::rethrow_exception(first_error);
}

OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("ols_fit: need matching x/y with at least two points");
  }
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw ConfigError("ols_fit: x values are all equal");
  OlsFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    fit.slope_se = std::sqrt(ssr / (static_cast<double>(n - 2) * sxx));
  }
  return fit;
}

double ols_slope_se_propagated(std::span<const double> x,
                               std::span<const double> se) {
  if (x.size() != se.size() || x.size() < 2) {
    throw ConfigError("ols_slope_se_propagated: need matching arrays, n >= 2");
  }
  const std::size_t n = x.size();
  double mx = 0.0;
  for (double v : x) mx += v;
  mx /= static_cast<double>(n);
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);
  if (sxx <= 0.0) throw ConfigError("ols_slope_se_propagated: x all equal");
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (x[i] - mx) / sxx;
    var += w * w * se[i] * se[i];
  }
  return std::sqrt(var);
}

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw ConfigError("gauss_legendre: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based first guess, then Newton on P_n.
    constexpr double kPi = 3.14159265358979323846;
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

std::string format_double(double x) {
  // Shortest string that parses back to exactly x.  Scanning all precisions
  // matters: at low precision %g may pick scientific form ("5e+01") even
  // though a higher precision yields the shorter fixed form ("50").
  char buf[40];
  std::string best;
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == x && (best.empty() || std::strlen(buf) < best.size())) {
      best.assign(buf);
    }
  }
  // Non-finite values never satisfy back == x; %g spells them out.
  return best.empty() ? std::string(buf) : best;
}

}  // namespace ldpq

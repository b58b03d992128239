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

#ifndef LDPQ_RANDOM_HPP_
#define LDPQ_RANDOM_HPP_

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>

namespace ldpq {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based random stream (Philox4x32-10).  A stream is addressed by a
// master seed plus up to three stream ids; distinct addresses give
// statistically independent streams regardless of the order or interleaving
// in which they are consumed.  This is what makes per-user randomness
// reproducible under any parallel schedule.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed, uint64_t id0 = 0, uint64_t id1 = 0,
                        uint64_t id2 = 0) {
    uint64_t h = 0x243F6A8885A308D3ULL;  // arbitrary nonzero start
    h = splitmix64(h ^ seed);
    h = splitmix64(h ^ id0);
    h = splitmix64(h ^ id1);
    h = splitmix64(h ^ id2);
    const uint64_t k = splitmix64(h);
    const uint64_t c = splitmix64(k);
    key_ = {static_cast<uint32_t>(k), static_cast<uint32_t>(k >> 32)};
    counter_ = {0, 0, static_cast<uint32_t>(c), static_cast<uint32_t>(c >> 32)};
    pos_ = 4;
  }

  uint32_t next_u32() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  uint64_t next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0, 1); safe for inverse-CDF transforms.
  double uniform01_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // One Bernoulli(p) draw; consumes exactly one uniform so that callers that
  // vary p (for example across privacy budgets) stay coupled on a common
  // underlying uniform.
  bool bernoulli(double p) {
    assert(p >= 0.0 && p <= 1.0);
    return uniform01() < p;
  }

  int rademacher() { return (next_u32() & 1u) ? 1 : -1; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = uniform01_open();
    const double v = uniform01_open();
    const double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(6.283185307179586476925286766559 * v);
    have_spare_ = true;
    return r * std::cos(6.283185307179586476925286766559 * v);
  }

 private:
  static void round(std::array<uint32_t, 4>& x, std::array<uint32_t, 2>& k) {
    const uint64_t p0 = uint64_t{0xD2511F53u} * x[0];
    const uint64_t p1 = uint64_t{0xCD9E8D57u} * x[2];
    x = {static_cast<uint32_t>(p1 >> 32) ^ x[1] ^ k[0],
         static_cast<uint32_t>(p1),
         static_cast<uint32_t>(p0 >> 32) ^ x[3] ^ k[1],
         static_cast<uint32_t>(p0)};
    k[0] += 0x9E3779B9u;
    k[1] += 0xBB67AE85u;
  }

  void refill() {
    block_ = counter_;
    std::array<uint32_t, 2> k = key_;
    for (int r = 0; r < 10; ++r) round(block_, k);
    if (++counter_[0] == 0) ++counter_[1];  // 64-bit block index
    pos_ = 0;
  }

  std::array<uint32_t, 4> counter_;
  std::array<uint32_t, 4> block_;
  std::array<uint32_t, 2> key_;
  int pos_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ldpq

#endif  // LDPQ_RANDOM_HPP_

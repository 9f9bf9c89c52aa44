// Copyright 2026 The vqtrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VQTRAIN_RNG_HPP_
#define VQTRAIN_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace vqtrain {

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child seed from a root seed and a path of integer keys.
// Distinct paths give statistically independent streams, so every circuit
// execution, batch shuffle, or repetition can own a private generator that
// does not depend on thread scheduling.
inline uint64_t derive_seed(uint64_t root, std::initializer_list<uint64_t> path) {
  uint64_t h = root ^ 0x5851f42d4c957f2dULL;
  for (uint64_t key : path) {
    uint64_t s = h ^ (key + 0x9e3779b97f4a7c15ULL);
    h = splitmix64(s);
  }
  return h;
}

// Fixed stream tags used when deriving per-purpose seeds from a run seed.
namespace stream {
inline constexpr uint64_t kInitParams = 1;
inline constexpr uint64_t kBatchShuffle = 2;
inline constexpr uint64_t kWorker = 3;
inline constexpr uint64_t kConvergenceTest = 4;
inline constexpr uint64_t kNoiseGen = 5;
inline constexpr uint64_t kSplit = 6;
inline constexpr uint64_t kRepetition = 7;
}  // namespace stream

// xoshiro256** with splitmix64 seeding. Satisfies UniformRandomBitGenerator
// so it can drive the <random> distributions.
class Rng {
 public:
  using result_type = uint64_t;

  explicit Rng(uint64_t seed) {
    for (auto& word : s_) word = splitmix64(seed);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~uint64_t{0}; }

  result_type operator()() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Box-Muller; draws two uniforms per call, no cached spare.
  double normal(double mean, double stddev) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Number of successes in n Bernoulli(p) trials.
  long binomial(long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<long> dist(n, p);
    return dist(*this);
  }

  // Uniform integer in [0, n), for Fisher-Yates shuffles.
  uint64_t below(uint64_t n) {
    const uint64_t threshold = (~n + 1) % n;  // == 2^64 mod n
    for (;;) {
      const uint64_t r = (*this)();
      if (r >= threshold) return r % n;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  static constexpr uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  uint64_t s_[4];
};

}  // namespace vqtrain

#endif  // VQTRAIN_RNG_HPP_

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

#ifndef VQTRAIN_NOISE_LAB_HPP_
#define VQTRAIN_NOISE_LAB_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vqtrain/circuit.hpp"

namespace vqtrain {

enum class NoiseGenMode { kGaussian, kDifferTargeted };

// A concrete heterogeneous noise assignment for the M nodes of one run.
struct NoiseInstance {
  std::vector<NoiseProfile> profiles;
  double mu = 0.0;  // requested mean single-qubit probability
  NoiseGenMode mode = NoiseGenMode::kGaussian;

  int num_nodes() const { return static_cast<int>(profiles.size()); }
  std::vector<double> p1_values() const;

  std::string to_json_string() const;
  static NoiseInstance from_json_string(const std::string& text);
};

// One p1 per node drawn from N(mu, (mu/9)^2), clamped into [0, 1];
// p2 = 4 * p1 as usual.
NoiseInstance sample_gaussian_profiles(int num_nodes, double mu, uint64_t seed);

// KL divergence of the normalized node-noise distribution from uniform:
// sum_k P_k ln(P_k M) with P_k = p_k / sum_i p_i and 0 ln 0 := 0.
// Zero iff all nodes are equally noisy; invariant under common scaling.
double differ_metric(std::span<const double> p1_values);
double differ_metric(const NoiseInstance& instance);

// Builds an instance whose differ_metric hits `target` within 1e-6 while the
// mean p1 stays at `mean`. A random simplex direction is drawn (sharpened
// toward its largest coordinate when the target needs more concentration than
// the draw provides), then the mix P(s) = (1-s) uniform + s direction is
// bisected on the monotone map s -> KL. Targets at or beyond ln(M) minus a
// small margin are rejected with InfeasibleTarget.
NoiseInstance generate_profiles_for_differ(int num_nodes, double target_differ,
                                           double mean, uint64_t seed);

}  // namespace vqtrain

#endif  // VQTRAIN_NOISE_LAB_HPP_

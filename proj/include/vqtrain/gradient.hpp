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

#ifndef VQTRAIN_GRADIENT_HPP_
#define VQTRAIN_GRADIENT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "vqtrain/model.hpp"

namespace vqtrain {

// Execution policy for the data-parallel kernels. Both paths produce
// bit-identical results; the serial one is the reference the parallel one is
// tested against.
enum class Exec { kSerial, kParallel };

// Half-open range of parameter indices assigned to one worker.
struct IndexRange {
  int lo = 0;
  int hi = 0;

  int size() const { return hi - lo; }
  bool contains(int j) const { return j >= lo && j < hi; }
  bool operator==(const IndexRange&) const = default;
};

struct GradientVector {
  std::vector<double> values;    // dense, exactly zero outside the slice
  long circuit_executions = 0;   // batch * (1 + 2 * slice_size)

  double norm_squared() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return s;
  }
};

// Loss gradient over `slice` by the parameter-shift rule: one forward pass
// per example plus two shifted circuits (theta_j +- pi/2) per component and
// example. Every circuit execution draws its shot noise from a generator
// seeded by (seed, example, circuit tag), so results do not depend on
// evaluation order. The regularizer term lambda * theta_j is added here,
// by the worker that owns component j.
GradientVector parameter_shift_gradient(const Model& model, std::span<const Sample> batch,
                                        const ParameterVector& params, IndexRange slice,
                                        const NoiseProfile& profile, Shots shots, double lambda,
                                        uint64_t seed, Exec exec = Exec::kSerial);

// Central-difference oracle over all components, analytic expectations only.
// Requesting it with finite shots raises OracleModeError: at useful epsilon
// the difference would be buried under shot noise.
GradientVector finite_difference_gradient(const Model& model, std::span<const Sample> batch,
                                          const ParameterVector& params, double epsilon,
                                          const NoiseProfile& profile, Shots shots,
                                          double lambda);

// Empirical split of a noisy gradient estimate into the depolarizing-scaled
// clean part, a systematic bias, and residual estimator variance.
struct BiasDecomposition {
  std::vector<double> clean;       // analytic, noiseless gradient
  std::vector<double> noisy_mean;  // mean of `repetitions` noisy estimates
  std::vector<double> bias;        // noisy_mean - (1 - p_tilde)^2 * clean
  std::vector<double> variance;    // per-component sample variance
  double p_tilde = 0.0;
  long repetitions = 0;
};

// Repeats the full noisy gradient `repetitions` times (30+ recommended for
// stable statistics) and fits it against the clean gradient.
BiasDecomposition estimate_bias_decomposition(const Model& model, std::span<const Sample> batch,
                                              const ParameterVector& params,
                                              const NoiseProfile& profile, long repetitions,
                                              Shots shots, double lambda, uint64_t seed);

}  // namespace vqtrain

#endif  // VQTRAIN_GRADIENT_HPP_

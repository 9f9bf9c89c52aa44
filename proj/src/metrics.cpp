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

#include "vqtrain/metrics.hpp"

#include <cmath>

#include "vqtrain/errors.hpp"

namespace vqtrain {

namespace {
inline constexpr double kPi = 3.1415926535897932384626433832795;
}

double smoothness_constant(int d, double lambda) {
  return (1.5 + lambda) * static_cast<double>(d) * static_cast<double>(d);
}

double lipschitz_constant(int d, double lambda) {
  return static_cast<double>(d) * (1.0 + 3.0 * kPi * lambda);
}

double ideal_speedup(int d, int num_nodes) {
  if (d < 1 || num_nodes < 1) throw SpecError("speed-up needs d >= 1 and M >= 1");
  const double dd = static_cast<double>(d);
  return (1.0 + 2.0 * dd) / (1.0 + 2.0 * dd / static_cast<double>(num_nodes));
}

double measured_speedup(const ConvergenceRecord& single_node, const ConvergenceRecord& multi_node,
                        int d, int num_nodes) {
  if (!single_node.converged || !multi_node.converged) {
    throw SpeedupUndefined("speed-up of a run that never converged");
  }
  const double dd = static_cast<double>(d);
  return ((1.0 + 2.0 * dd) * single_node.iterations) /
         ((1.0 + 2.0 * dd / static_cast<double>(num_nodes)) * multi_node.iterations);
}

double r1_metric(std::span<const std::vector<double>> final_gradients) {
  if (final_gradients.empty()) throw MetricError("no runs to average");
  double total = 0.0;
  for (const auto& gradient : final_gradients) {
    double norm_sq = 0.0;
    for (double g : gradient) norm_sq += g * g;
    total += norm_sq;
  }
  return total / static_cast<double>(final_gradients.size());
}

double r1_upper_bound(const TheoryParams& params) {
  if (params.p_max >= 1.0) throw BoundUndefined("bound diverges at p = 1");
  if (params.p_max < 0.0) throw BoundUndefined("merged probability must be nonnegative");
  if (params.iterations < 1 || params.shots < 1 || params.dataset_size < 1) {
    throw BoundUndefined("T, K and N_D must be positive");
  }
  const double d = static_cast<double>(params.d);
  const double lambda = params.lambda;
  const double t = static_cast<double>(params.iterations);
  const double k = static_cast<double>(params.shots);
  const double n = static_cast<double>(params.dataset_size);
  const double p = params.p_max;
  const double contraction = (1.0 - p) * (1.0 - p);
  const double g = lipschitz_constant(params.d, lambda);

  const double term_descent = (1.0 + 9.0 * kPi * kPi * lambda * d) / (2.0 * t * contraction);
  const double term_noise_bias =
      (2.0 * g + d) / contraction * (2.0 - p) * p * (1.0 + 10.0 * lambda) * (1.0 + 10.0 * lambda);
  const double term_shot_noise = (2.0 * d * k + d) / (2.0 * n * k * k) / contraction;
  return term_descent + term_noise_bias + term_shot_noise;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("rank correlation needs paired samples");
  if (x.size() < 2) throw MetricError("rank correlation needs at least two pairs");
  long concordant = 0, discordant = 0;
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double dx = x[j] - x[i];
      const double dy = y[j] - y[i];
      const double prod = dx * dy;
      if (prod > 0.0) ++concordant;
      if (prod < 0.0) ++discordant;
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(concordant - discordant) / pairs;
}

}  // namespace vqtrain

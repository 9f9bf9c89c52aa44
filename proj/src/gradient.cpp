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

#include "vqtrain/gradient.hpp"

#include <cmath>

#include "vqtrain/errors.hpp"

namespace vqtrain {

namespace {

inline constexpr double kHalfPi = 1.5707963267948966192313216916398;

// Circuit tags inside one (seed, example) stream: 0 is the forward pass,
// 2j+1 / 2j+2 the +/- shift of component j. Tags are keyed on the absolute
// component index so reassigning slices never reuses a stream.
double run_prediction(const Model& model, const Sample& sample, const ParameterVector& params,
                      const NoiseProfile& profile, Shots shots, uint64_t seed, size_t example,
                      uint64_t tag) {
  if (shots.is_analytic()) {
    return predict(model, sample.features, params, profile, shots, nullptr);
  }
  Rng rng(derive_seed(seed, {static_cast<uint64_t>(example), tag}));
  return predict(model, sample.features, params, profile, shots, &rng);
}

}  // namespace

GradientVector parameter_shift_gradient(const Model& model, std::span<const Sample> batch,
                                        const ParameterVector& params, IndexRange slice,
                                        const NoiseProfile& profile, Shots shots, double lambda,
                                        uint64_t seed, Exec exec) {
  if (batch.empty()) throw BatchError("gradient of an empty batch");
  const int d = model.circuit.param_count();
  if (static_cast<int>(params.size()) != d) {
    throw SpecError("parameter vector length does not match the circuit");
  }
  if (slice.lo < 0 || slice.hi > d || slice.lo > slice.hi) {
    throw SpecError("gradient slice outside 0..d-1");
  }
  const long n = static_cast<long>(batch.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool parallel = exec == Exec::kParallel;

  // Forward pass, once per example.
  std::vector<double> forward(batch.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (long k = 0; k < n; ++k) {
    forward[k] = run_prediction(model, batch[k], params, profile, shots, seed, k, 0);
  }

  GradientVector grad;
  grad.values.assign(d, 0.0);
  grad.circuit_executions = n * (1 + 2 * static_cast<long>(slice.size()));

#pragma omp parallel for schedule(static) if (parallel)
  for (int j = slice.lo; j < slice.hi; ++j) {
    ParameterVector shifted = params;
    double data_term = 0.0;
    for (long k = 0; k < n; ++k) {
      shifted.values[j] = params[j] + kHalfPi;
      const double y_plus = run_prediction(model, batch[k], shifted, profile, shots, seed, k,
                                           2 * static_cast<uint64_t>(j) + 1);
      shifted.values[j] = params[j] - kHalfPi;
      const double y_minus = run_prediction(model, batch[k], shifted, profile, shots, seed, k,
                                            2 * static_cast<uint64_t>(j) + 2);
      shifted.values[j] = params[j];
      data_term += (forward[k] - batch[k].label) * 0.5 * (y_plus - y_minus);
    }
    grad.values[j] = data_term * inv_n + lambda * params[j];
  }
  return grad;
}

GradientVector finite_difference_gradient(const Model& model, std::span<const Sample> batch,
                                          const ParameterVector& params, double epsilon,
                                          const NoiseProfile& profile, Shots shots,
                                          double lambda) {
  if (!shots.is_analytic()) {
    throw OracleModeError("finite differences are only meaningful with analytic expectations");
  }
  if (epsilon <= 0.0) throw SpecError("finite-difference step must be positive");
  if (batch.empty()) throw BatchError("gradient of an empty batch");

  const int d = model.circuit.param_count();
  std::vector<double> labels(batch.size());
  for (size_t k = 0; k < batch.size(); ++k) labels[k] = batch[k].label;

  const auto loss_at = [&](const ParameterVector& theta) {
    std::vector<double> preds(batch.size());
    for (size_t k = 0; k < batch.size(); ++k) {
      preds[k] = predict(model, batch[k].features, theta, profile, shots, nullptr);
    }
    return mse_loss(preds, labels, theta, lambda);
  };

  GradientVector grad;
  grad.values.assign(d, 0.0);
  grad.circuit_executions = 2L * d * static_cast<long>(batch.size());
  ParameterVector theta = params;
  for (int j = 0; j < d; ++j) {
    theta.values[j] = params[j] + epsilon;
    const double up = loss_at(theta);
    theta.values[j] = params[j] - epsilon;
    const double down = loss_at(theta);
    theta.values[j] = params[j];
    grad.values[j] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

BiasDecomposition estimate_bias_decomposition(const Model& model, std::span<const Sample> batch,
                                              const ParameterVector& params,
                                              const NoiseProfile& profile, long repetitions,
                                              Shots shots, double lambda, uint64_t seed) {
  if (repetitions < 1) throw SpecError("bias decomposition needs at least one repetition");
  const int d = model.circuit.param_count();
  const IndexRange all{0, d};

  BiasDecomposition result;
  result.repetitions = repetitions;
  result.p_tilde = model.circuit.noise_mode == NoiseMode::kNone
                       ? 0.0
                       : merged_depolarizing_prob(profile.p1, model.circuit.merged_depth);
  result.clean = parameter_shift_gradient(model, batch, params, all,
                                          NoiseProfile::noiseless(profile.node_id),
                                          Shots::analytic(), lambda, seed)
                     .values;

  std::vector<double> mean(d, 0.0);
  std::vector<double> m2(d, 0.0);  // Welford accumulator
  for (long r = 0; r < repetitions; ++r) {
    const GradientVector g = parameter_shift_gradient(
        model, batch, params, all, profile, shots, lambda,
        derive_seed(seed, {static_cast<uint64_t>(r)}));
    for (int j = 0; j < d; ++j) {
      const double delta = g.values[j] - mean[j];
      mean[j] += delta / static_cast<double>(r + 1);
      m2[j] += delta * (g.values[j] - mean[j]);
    }
  }
  result.noisy_mean = mean;
  result.variance.assign(d, 0.0);
  result.bias.assign(d, 0.0);
  const double shrink = (1.0 - result.p_tilde) * (1.0 - result.p_tilde);
  for (int j = 0; j < d; ++j) {
    if (repetitions > 1) result.variance[j] = m2[j] / static_cast<double>(repetitions - 1);
    result.bias[j] = mean[j] - shrink * result.clean[j];
  }
  return result;
}

}  // namespace vqtrain

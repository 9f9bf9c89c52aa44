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

#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "vqtrain/errors.hpp"
#include "vqtrain/gradient.hpp"

using namespace vqtrain;

namespace {
constexpr double kHalfPi = 1.5707963267948966;
}

TEST_SUITE("gradient") {

TEST_CASE("shift rule reproduces the derivative of a one-qubit rotation") {
  // <Z> after Ry(theta)|0> is cos(theta); the rule must return -sin(theta).
  CircuitSpec spec;
  spec.n_qubits = 1;
  spec.gates.push_back(GateOp::ry(0, 0));
  const Observable z = Observable::z_parity(1);
  const DensityMatrix zero(1);
  const auto value_at = [&](double theta) {
    const std::vector<double> params{theta};
    return expectation(run_circuit(spec, zero, params, NoiseProfile::noiseless()), z,
                       Shots::analytic());
  };
  const auto shift_derivative = [&](double theta) {
    return 0.5 * (value_at(theta + kHalfPi) - value_at(theta - kHalfPi));
  };
  CHECK(shift_derivative(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(shift_derivative(kHalfPi) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(shift_derivative(1.1) == doctest::Approx(-std::sin(1.1)).epsilon(1e-12));
}

TEST_CASE("zero residuals give a zero gradient slice") {
  const Model model = make_classifier();
  // theta = 0 predicts exactly 1.0 for the first basis vector, so labeling
  // it 1 kills every residual.
  const std::vector<Sample> batch{{{1.0, 0.0, 0.0, 0.0}, 1.0}};
  const ParameterVector zeros = ParameterVector::zeros(8);
  const GradientVector grad =
      parameter_shift_gradient(model, batch, zeros, {0, 8}, NoiseProfile::noiseless(),
                               Shots::analytic(), 0.0, 1);
  for (double g : grad.values) CHECK(g == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("parameter shift matches finite differences") {
  const Model model = make_classifier();
  const std::vector<Sample> batch = testing::toy_batch();
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const ParameterVector params = ParameterVector::random(8, rng);
    const double lambda = trial % 2 == 0 ? 0.0 : 0.1;
    const GradientVector shift =
        parameter_shift_gradient(model, batch, params, {0, 8}, NoiseProfile::noiseless(),
                                 Shots::analytic(), lambda, 1);
    const GradientVector oracle = finite_difference_gradient(
        model, batch, params, 1e-6, NoiseProfile::noiseless(), Shots::analytic(), lambda);
    for (int j = 0; j < 8; ++j) {
      CHECK(std::abs(shift.values[j] - oracle.values[j]) < 1e-6);
    }
  }
}

TEST_CASE("with zero data residuals the gradient reduces to the regularizer") {
  const Model model = make_classifier();
  const std::vector<Sample> batch{{{1.0, 0.0, 0.0, 0.0}, 1.0}};
  const ParameterVector zeros = ParameterVector::zeros(8);
  const double lambda = 0.7;
  const GradientVector oracle = finite_difference_gradient(
      model, batch, zeros, 1e-6, NoiseProfile::noiseless(), Shots::analytic(), lambda);
  const GradientVector shift =
      parameter_shift_gradient(model, batch, zeros, {0, 8}, NoiseProfile::noiseless(),
                               Shots::analytic(), lambda, 1);
  for (int j = 0; j < 8; ++j) {
    CHECK(oracle.values[j] == doctest::Approx(lambda * zeros[j]).epsilon(1e-8));
    CHECK(shift.values[j] == doctest::Approx(lambda * zeros[j]).epsilon(1e-12));
  }
}

TEST_CASE("central differences converge at second order") {
  const Model model = make_classifier();
  const std::vector<Sample> batch = testing::toy_batch();
  Rng rng(55);
  const ParameterVector params = ParameterVector::random(8, rng);
  const GradientVector exact =
      parameter_shift_gradient(model, batch, params, {0, 8}, NoiseProfile::noiseless(),
                               Shots::analytic(), 0.0, 1);
  const auto max_error = [&](double eps) {
    const GradientVector fd = finite_difference_gradient(
        model, batch, params, eps, NoiseProfile::noiseless(), Shots::analytic(), 0.0);
    double worst = 0.0;
    for (int j = 0; j < 8; ++j) worst = std::max(worst, std::abs(fd.values[j] - exact.values[j]));
    return worst;
  };
  const double coarse = max_error(0.04);
  const double fine = max_error(0.02);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("oracle refuses sampled mode") {
  const Model model = make_classifier();
  const std::vector<Sample> batch = testing::toy_batch();
  CHECK_THROWS_AS(finite_difference_gradient(model, batch, ParameterVector::zeros(8), 1e-6,
                                             NoiseProfile::noiseless(), Shots::sampled(8192),
                                             0.0),
                  OracleModeError);
}

TEST_CASE("empty batch and bad slices are rejected") {
  const Model model = make_classifier();
  const std::vector<Sample> none;
  CHECK_THROWS_AS(parameter_shift_gradient(model, none, ParameterVector::zeros(8), {0, 8},
                                           NoiseProfile::noiseless(), Shots::analytic(), 0.0, 1),
                  BatchError);
  const std::vector<Sample> batch = testing::toy_batch();
  CHECK_THROWS_AS(parameter_shift_gradient(model, batch, ParameterVector::zeros(8), {4, 9},
                                           NoiseProfile::noiseless(), Shots::analytic(), 0.0, 1),
                  SpecError);
}

TEST_CASE("slice sparsity and circuit accounting") {
  const Model model = make_classifier();
  const std::vector<Sample> batch = testing::toy_batch();
  Rng rng(7);
  const ParameterVector params = ParameterVector::random(8, rng);
  const IndexRange slice{2, 5};
  const GradientVector grad = parameter_shift_gradient(
      model, batch, params, slice, NoiseProfile::from_p1(0, 0.01), Shots::sampled(512), 0.0, 42);
  for (int j = 0; j < 8; ++j) {
    if (!slice.contains(j)) CHECK(grad.values[j] == 0.0);
  }
  CHECK(grad.circuit_executions == static_cast<long>(batch.size()) * (1 + 2 * slice.size()));
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  const Model model = make_classifier();
  const std::vector<Sample> batch = testing::toy_batch();
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const ParameterVector params = ParameterVector::random(8, rng);
    const GradientVector serial =
        parameter_shift_gradient(model, batch, params, {0, 8}, NoiseProfile::from_p1(0, 0.02),
                                 Shots::sampled(1024), 0.05, 91, Exec::kSerial);
    const GradientVector parallel =
        parameter_shift_gradient(model, batch, params, {0, 8}, NoiseProfile::from_p1(0, 0.02),
                                 Shots::sampled(1024), 0.05, 91, Exec::kParallel);
    CHECK(serial.values == parallel.values);
    CHECK(serial.circuit_executions == parallel.circuit_executions);
  }
}

TEST_CASE("sampled gradients are unbiased over seeds") {
  // Small model, tiny batch: the mean over many seeds must approach the
  // analytic noisy gradient within standard-error bars.
  const Model model = make_classifier(2, 2, NoiseMode::kMerged);
  const std::vector<Sample> batch{{{0.8, 0.6, 0.2, 0.1}, 1.0}, {{0.1, 0.9, 0.5, 0.2}, 0.0}};
  Rng rng(3);
  const ParameterVector params = ParameterVector::random(4, rng);
  const NoiseProfile profile = NoiseProfile::from_p1(0, 0.05);

  const GradientVector analytic = parameter_shift_gradient(
      model, batch, params, {0, 4}, profile, Shots::analytic(), 0.0, 0);

  const int seeds = 500;
  std::vector<double> mean(4, 0.0), m2(4, 0.0);
  for (int s = 0; s < seeds; ++s) {
    const GradientVector g = parameter_shift_gradient(
        model, batch, params, {0, 4}, profile, Shots::sampled(128), 0.0,
        derive_seed(777, {static_cast<uint64_t>(s)}));
    for (int j = 0; j < 4; ++j) {
      const double delta = g.values[j] - mean[j];
      mean[j] += delta / (s + 1);
      m2[j] += delta * (g.values[j] - mean[j]);
    }
  }
  for (int j = 0; j < 4; ++j) {
    const double se = std::sqrt(m2[j] / (seeds - 1) / seeds);
    CHECK(std::abs(mean[j] - analytic.values[j]) < 5.0 * se + 1e-12);
  }
}

TEST_CASE("bias decomposition endpoints") {
  const Model model = make_classifier(2, 4, NoiseMode::kMerged);
  const std::vector<Sample> batch = testing::toy_batch();
  Rng rng(19);
  const ParameterVector params = ParameterVector::random(8, rng);

  // No noise, analytic: zero bias and zero variance.
  const BiasDecomposition clean = estimate_bias_decomposition(
      model, batch, params, NoiseProfile::noiseless(), 30, Shots::analytic(), 0.0, 5);
  for (int j = 0; j < 8; ++j) {
    CHECK(clean.bias[j] == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(clean.variance[j] == 0.0);
  }

  // Full depolarizing: predictions pin to 1/2, the data term dies, and the
  // gradient is the regularizer alone.
  const double lambda = 0.3;
  const BiasDecomposition dead = estimate_bias_decomposition(
      model, batch, params, NoiseProfile::from_p1(0, 1.0), 30, Shots::analytic(), lambda, 5);
  for (int j = 0; j < 8; ++j) {
    CHECK(dead.noisy_mean[j] == doctest::Approx(lambda * params[j]).epsilon(1e-12));
  }
}

TEST_CASE("noisy mean contracts by the squared channel factor") {
  // Labels 0.5 make the cross term vanish, so the noisy data gradient is
  // exactly (1 - p)^2 times the clean one; verify through sampling.
  const Model model = make_classifier(2, 4, NoiseMode::kMerged);
  std::vector<Sample> batch = testing::toy_batch();
  for (auto& sample : batch) sample.label = 0.5;
  Rng rng(23);
  const ParameterVector params = ParameterVector::random(8, rng);
  const NoiseProfile profile = NoiseProfile::from_p1(0, 0.05);

  const long reps = 200;
  const BiasDecomposition decomp = estimate_bias_decomposition(
      model, batch, params, profile, reps, Shots::sampled(2048), 0.0, 31);
  const double shrink = (1.0 - decomp.p_tilde) * (1.0 - decomp.p_tilde);
  for (int j = 0; j < 8; ++j) {
    const double se = std::sqrt(decomp.variance[j] / static_cast<double>(reps));
    CHECK(std::abs(decomp.noisy_mean[j] - shrink * decomp.clean[j]) < 5.0 * se + 1e-9);
  }
}

}  // TEST_SUITE

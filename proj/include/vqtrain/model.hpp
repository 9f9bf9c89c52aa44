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

#ifndef VQTRAIN_MODEL_HPP_
#define VQTRAIN_MODEL_HPP_

#include <span>
#include <vector>

#include "vqtrain/circuit.hpp"
#include "vqtrain/rng.hpp"

namespace vqtrain {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Trainable rotation angles, kept in [0, 2*pi).
struct ParameterVector {
  std::vector<double> values;

  size_t size() const { return values.size(); }
  double& operator[](size_t i) { return values[i]; }
  double operator[](size_t i) const { return values[i]; }
  std::span<const double> span() const { return values; }

  // Uniform draw from [0, 2*pi)^d.
  static ParameterVector random(size_t d, Rng& rng);
  static ParameterVector zeros(size_t d) { return {std::vector<double>(d, 0.0)}; }

  void wrap();  // reduce every angle mod 2*pi
  double norm_squared() const;
  bool operator==(const ParameterVector&) const = default;
};

// One labeled training example; features must amplitude-encode.
struct Sample {
  std::vector<double> features;
  double label = 0.0;
};

// Amplitude-encoded input, layered Ry ansatz with CZ entanglers, and a
// Z-parity readout mapped onto [0, 1].
struct Model {
  CircuitSpec circuit;
  Observable observable;
};

// Each layer applies one trainable Ry per qubit (parameter indices assigned
// layer-major then qubit-major) followed by a CZ ladder; the entangler after
// the last layer is dropped since it commutes with the parity readout.
// With n_qubits=2, layers=4 this has d = 8 parameters and 3 CZ gates.
CircuitSpec build_ansatz(int n_qubits = 2, int layers = 4,
                         NoiseMode noise_mode = NoiseMode::kPerGate);

Model make_classifier(int n_qubits = 2, int layers = 4,
                      NoiseMode noise_mode = NoiseMode::kPerGate);

// y_hat = (1 + <Z...Z>) / 2 for the encoded input under the node's noise.
double predict(const Model& model, std::span<const double> x, const ParameterVector& params,
               const NoiseProfile& profile, Shots shots, Rng* rng = nullptr);

// (1 / 2N) sum_k (y_hat_k - y_k)^2 + (lambda / 2) ||theta||^2
double mse_loss(std::span<const double> predictions, std::span<const double> labels,
                const ParameterVector& params, double lambda);

// Fraction of examples with (y_hat >= 0.5) == (y == 1).
double classification_accuracy(std::span<const double> predictions,
                               std::span<const double> labels);

}  // namespace vqtrain

#endif  // VQTRAIN_MODEL_HPP_

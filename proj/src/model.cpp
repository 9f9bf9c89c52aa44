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

#include "vqtrain/model.hpp"

#include <cmath>

#include "vqtrain/errors.hpp"

namespace vqtrain {

ParameterVector ParameterVector::random(size_t d, Rng& rng) {
  ParameterVector params{std::vector<double>(d)};
  for (double& v : params.values) v = kTwoPi * rng.uniform();
  return params;
}

void ParameterVector::wrap() {
  for (double& v : values) {
    v = std::fmod(v, kTwoPi);
    if (v < 0.0) v += kTwoPi;
  }
}

double ParameterVector::norm_squared() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

CircuitSpec build_ansatz(int n_qubits, int layers, NoiseMode noise_mode) {
  if (n_qubits < 1 || layers < 1) throw SpecError("ansatz needs at least one qubit and layer");
  CircuitSpec spec;
  spec.n_qubits = n_qubits;
  spec.noise_mode = noise_mode;
  spec.merged_depth = layers;
  int param = 0;
  for (int layer = 0; layer < layers; ++layer) {
    for (int q = 0; q < n_qubits; ++q) {
      spec.gates.push_back(GateOp::ry(q, param++));
    }
    if (layer + 1 < layers) {
      for (int q = 0; q + 1 < n_qubits; ++q) {
        spec.gates.push_back(GateOp::cz(q, q + 1));
      }
    }
  }
  spec.validate();
  return spec;
}

Model make_classifier(int n_qubits, int layers, NoiseMode noise_mode) {
  return Model{build_ansatz(n_qubits, layers, noise_mode), Observable::z_parity(n_qubits)};
}

double predict(const Model& model, std::span<const double> x, const ParameterVector& params,
               const NoiseProfile& profile, Shots shots, Rng* rng) {
  const DensityMatrix encoded = amplitude_encode(x);
  const DensityMatrix out = run_circuit(model.circuit, encoded, params.span(), profile);
  return 0.5 * (1.0 + expectation(out, model.observable, shots, rng));
}

double mse_loss(std::span<const double> predictions, std::span<const double> labels,
                const ParameterVector& params, double lambda) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("predictions and labels differ in length");
  }
  if (predictions.empty()) throw ShapeError("loss of an empty batch is undefined");
  double sum = 0.0;
  for (size_t k = 0; k < predictions.size(); ++k) {
    const double r = predictions[k] - labels[k];
    sum += r * r;
  }
  return sum / (2.0 * static_cast<double>(predictions.size())) +
         0.5 * lambda * params.norm_squared();
}

double classification_accuracy(std::span<const double> predictions,
                               std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("predictions and labels differ in length");
  }
  if (predictions.empty()) throw DataError("accuracy of an empty set is undefined");
  size_t correct = 0;
  for (size_t k = 0; k < predictions.size(); ++k) {
    const bool predicted_one = predictions[k] >= 0.5;
    const bool is_one = labels[k] == 1.0;
    if (predicted_one == is_one) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace vqtrain

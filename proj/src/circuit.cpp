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

#include "vqtrain/circuit.hpp"

#include <bit>
#include <cmath>

#include "vqtrain/errors.hpp"

namespace vqtrain {

NoiseProfile NoiseProfile::from_p1(int node_id, double p1) {
  NoiseProfile profile{node_id, p1, std::min(4.0 * p1, 1.0)};
  profile.validate();
  return profile;
}

void NoiseProfile::validate() const {
  if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0) {
    throw NoiseError("depolarizing probabilities must lie in [0, 1]");
  }
}

int CircuitSpec::param_count() const {
  int count = 0;
  for (const auto& gate : gates) {
    if (gate.is_parameterized()) ++count;
  }
  return count;
}

void CircuitSpec::validate() const {
  const int d = param_count();
  std::vector<int> seen(d, 0);
  for (const auto& gate : gates) {
    for (int t = 0; t < gate.n_targets; ++t) {
      if (gate.targets[t] < 0 || gate.targets[t] >= n_qubits) {
        throw SpecError("gate target out of range");
      }
    }
    if (gate.n_targets == 2 && gate.targets[0] == gate.targets[1]) {
      throw SpecError("two-qubit gate targets must be distinct");
    }
    if (gate.is_parameterized()) {
      if (gate.n_targets != 1) throw SpecError("only single-qubit gates take parameters");
      if (gate.param_index >= d) throw SpecError("parameter indices must form 0..d-1");
      if (seen[gate.param_index]++) throw SpecError("duplicate parameter index");
    }
  }
  if (noise_mode == NoiseMode::kMerged && merged_depth < 1) {
    throw SpecError("merged noise depth must be positive");
  }
}

double merged_depolarizing_prob(double p, int layers) {
  if (p < 0.0 || p > 1.0) throw NoiseError("depolarizing probability outside [0, 1]");
  if (layers < 1) throw NoiseError("layer count must be positive");
  return 1.0 - std::pow(1.0 - p, layers);
}

namespace {

std::array<cplx, 4> rotation_y(double angle) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  return {cplx{c, 0}, cplx{-s, 0}, cplx{s, 0}, cplx{c, 0}};
}

std::array<cplx, 4> rotation_z(double angle) {
  return {std::polar(1.0, -0.5 * angle), cplx{}, cplx{}, std::polar(1.0, 0.5 * angle)};
}

void apply_gate_inplace(DensityMatrix& state, const GateOp& gate, double bound_angle) {
  switch (gate.kind) {
    case GateKind::kRotationY:
      state.apply_unitary_1q(gate.targets[0], rotation_y(bound_angle));
      break;
    case GateKind::kRotationZ:
      state.apply_unitary_1q(gate.targets[0], rotation_z(bound_angle));
      break;
    case GateKind::kControlledZ:
      state.apply_cz(gate.targets[0], gate.targets[1]);
      break;
    case GateKind::kGeneric1q:
      state.apply_unitary_1q(gate.targets[0], gate.unitary);
      break;
  }
}

size_t support_mask(const GateOp& gate) {
  size_t mask = 0;
  for (int t = 0; t < gate.n_targets; ++t) mask |= size_t{1} << gate.targets[t];
  return mask;
}

}  // namespace

DensityMatrix apply_gate(const DensityMatrix& state, const GateOp& gate, double bound_angle) {
  DensityMatrix out = state;
  apply_gate_inplace(out, gate, bound_angle);
  return out;
}

DensityMatrix apply_depolarizing(const DensityMatrix& state, size_t qubit_mask, double p) {
  DensityMatrix out = state;
  out.depolarize(qubit_mask, p);
  return out;
}

DensityMatrix run_circuit(const CircuitSpec& spec, const DensityMatrix& input,
                          std::span<const double> params, const NoiseProfile& profile) {
  if (input.n_qubits() != spec.n_qubits) {
    throw SpecError("input state size does not match the circuit");
  }
  if (static_cast<int>(params.size()) != spec.param_count()) {
    throw SpecError("parameter vector length does not match the circuit");
  }
  DensityMatrix state = input;
  for (const auto& gate : spec.gates) {
    const double angle = gate.is_parameterized() ? params[gate.param_index] : gate.angle;
    apply_gate_inplace(state, gate, angle);
    if (spec.noise_mode == NoiseMode::kPerGate) {
      const double p = gate.n_targets == 2 ? profile.p2 : profile.p1;
      if (p > 0.0) state.depolarize(support_mask(gate), p);
    }
  }
  if (spec.noise_mode == NoiseMode::kMerged) {
    const double p = merged_depolarizing_prob(profile.p1, spec.merged_depth);
    if (p > 0.0) state.depolarize(state.dim() - 1, p);
  }
  return state;
}

double Observable::eigenvalue(size_t basis) const {
  return (std::popcount(basis) & 1) ? -1.0 : 1.0;
}

Shots Shots::sampled(long k) {
  if (k < 1) throw SpecError("shot count must be at least 1");
  return Shots(k);
}

double expectation(const DensityMatrix& state, const Observable& obs, Shots shots, Rng* rng) {
  if (obs.n_qubits != state.n_qubits()) {
    throw UnsupportedObservable("observable size does not match the state");
  }
  if (shots.is_analytic()) {
    double value = 0.0;
    for (size_t i = 0; i < state.dim(); ++i) {
      value += obs.eigenvalue(i) * state.at(i, i).real();
    }
    return value;
  }
  if (rng == nullptr) throw SpecError("sampled expectation needs a generator");
  // Parity is a function of the measured bitstring, so the count of +1
  // outcomes among k draws is binomial on the total even-parity weight.
  const std::vector<double> probs = state.diagonal_probs();
  double p_plus = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (obs.eigenvalue(i) > 0.0) p_plus += probs[i];
  }
  const long k_plus = rng->binomial(shots.k(), p_plus);
  return static_cast<double>(2 * k_plus - shots.k()) / static_cast<double>(shots.k());
}

}  // namespace vqtrain

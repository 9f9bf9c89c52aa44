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

#ifndef VQTRAIN_CIRCUIT_HPP_
#define VQTRAIN_CIRCUIT_HPP_

#include <array>
#include <span>
#include <vector>

#include "vqtrain/density_matrix.hpp"
#include "vqtrain/rng.hpp"

namespace vqtrain {

// Depolarizing noise rates of one simulated QPU node. Two-qubit gates are
// four times noisier than single-qubit ones, matching current hardware.
struct NoiseProfile {
  int node_id = 0;
  double p1 = 0.0;  // single-qubit depolarizing probability
  double p2 = 0.0;  // two-qubit depolarizing probability

  static NoiseProfile noiseless(int node_id = 0) { return {node_id, 0.0, 0.0}; }
  // p2 = min(4 * p1, 1).
  static NoiseProfile from_p1(int node_id, double p1);
  void validate() const;
};

enum class GateKind { kRotationY, kRotationZ, kControlledZ, kGeneric1q };

struct GateOp {
  GateKind kind = GateKind::kRotationY;
  std::array<int, 2> targets{0, 0};
  int n_targets = 1;
  double angle = 0.0;      // fixed angle; ignored when param_index >= 0
  int param_index = -1;    // index into the trainable parameter vector
  std::array<cplx, 4> unitary{};  // kGeneric1q payload

  static GateOp ry(int target, int param_index) {
    return GateOp{GateKind::kRotationY, {target, 0}, 1, 0.0, param_index, {}};
  }
  static GateOp ry_fixed(int target, double angle) {
    return GateOp{GateKind::kRotationY, {target, 0}, 1, angle, -1, {}};
  }
  static GateOp rz(int target, int param_index) {
    return GateOp{GateKind::kRotationZ, {target, 0}, 1, 0.0, param_index, {}};
  }
  static GateOp cz(int a, int b) {
    return GateOp{GateKind::kControlledZ, {a, b}, 2, 0.0, -1, {}};
  }
  static GateOp generic_1q(int target, const std::array<cplx, 4>& u) {
    return GateOp{GateKind::kGeneric1q, {target, 0}, 1, 0.0, -1, u};
  }

  bool is_parameterized() const { return param_index >= 0; }
};

enum class NoiseMode { kNone, kPerGate, kMerged };

// An ordered gate list plus the noise placement rule.
//
// kPerGate applies a depolarizing channel right after every gate on that
// gate's support (p1 for one target, p2 for two). kMerged runs the circuit
// noiselessly and then applies a single full-register channel whose
// probability folds `merged_depth` per-layer channels into one.
struct CircuitSpec {
  int n_qubits = 0;
  std::vector<GateOp> gates;
  NoiseMode noise_mode = NoiseMode::kNone;
  int merged_depth = 1;

  int param_count() const;
  // Checks targets and that param_index values form 0..d-1, each once.
  void validate() const;
};

// Probability of the single channel equivalent to `layers` stacked
// depolarizing channels of probability p: 1 - (1 - p)^layers.
double merged_depolarizing_prob(double p, int layers);

// Applies one gate with the given resolved angle; gate noise is not applied
// here. Pure: the input state is left untouched.
DensityMatrix apply_gate(const DensityMatrix& state, const GateOp& gate, double bound_angle);

// Pure wrapper over DensityMatrix::depolarize.
DensityMatrix apply_depolarizing(const DensityMatrix& state, size_t qubit_mask, double p);

// Runs the whole circuit on `input` with noise placed per spec.noise_mode.
DensityMatrix run_circuit(const CircuitSpec& spec, const DensityMatrix& input,
                          std::span<const double> params, const NoiseProfile& profile);

// Tensor-product-of-Z observable; eigenvalue of basis state i is the parity
// of its bit count (+1 even, -1 odd). Diagonal, traceless, eigenvalues +-1.
struct Observable {
  enum class Kind { kZParity };
  Kind kind = Kind::kZParity;
  int n_qubits = 0;

  static Observable z_parity(int n_qubits) { return {Kind::kZParity, n_qubits}; }
  double eigenvalue(size_t basis) const;
};

// Measurement budget: exact trace or a finite number of shots.
class Shots {
 public:
  static Shots analytic() { return Shots(0); }
  static Shots sampled(long k);
  bool is_analytic() const { return k_ == 0; }
  long k() const { return k_; }
  bool operator==(const Shots&) const = default;

 private:
  explicit Shots(long k) : k_(k) {}
  long k_;
};

// <O> either exactly as Tr(O rho) or as the mean of k i.i.d. eigenvalue
// draws from the diagonal distribution of rho (rng required in that case).
double expectation(const DensityMatrix& state, const Observable& obs, Shots shots,
                   Rng* rng = nullptr);

}  // namespace vqtrain

#endif  // VQTRAIN_CIRCUIT_HPP_

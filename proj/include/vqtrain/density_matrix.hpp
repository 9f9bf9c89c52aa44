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

#ifndef VQTRAIN_DENSITY_MATRIX_HPP_
#define VQTRAIN_DENSITY_MATRIX_HPP_

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vqtrain {

using cplx = std::complex<double>;

// Exact mixed state of n qubits as a dense 2^n x 2^n complex matrix,
// row-major, qubit 0 = least significant bit of the basis index.
class DensityMatrix {
 public:
  // |0...0><0...0|
  explicit DensityMatrix(int n_qubits);

  static DensityMatrix maximally_mixed(int n_qubits);

  int n_qubits() const { return n_; }
  size_t dim() const { return size_t{1} << n_; }

  cplx& at(size_t row, size_t col) { return a_[row * dim() + col]; }
  const cplx& at(size_t row, size_t col) const { return a_[row * dim() + col]; }

  std::span<const cplx> data() const { return a_; }

  double trace_real() const;

  // Diagonal as a probability vector: negatives from round-off clamped to
  // zero, then renormalized to sum 1.
  std::vector<double> diagonal_probs() const;

  // max |rho - rho^dagger| entrywise.
  double hermiticity_defect() const;

  // In-place kernels. The free functions below expose the pure versions.
  void apply_unitary_1q(int target, const std::array<cplx, 4>& u);
  void apply_cz(int control, int target);
  // (1-p) rho + p (I_subset / 2^k  tensor  Tr_subset rho), subset given as a
  // bit mask over qubits. The full-register mask recovers the plain
  // depolarizing map onto the maximally mixed state.
  void depolarize(size_t qubit_mask, double p);

 private:
  int n_;
  std::vector<cplx> a_;
};

// Pure state |psi><psi| with <basis_k|psi> = x_k / ||x||.
// Throws EncodingError for the zero vector or a non-power-of-two length.
DensityMatrix amplitude_encode(std::span<const double> x);

}  // namespace vqtrain

#endif  // VQTRAIN_DENSITY_MATRIX_HPP_

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

#include "vqtrain/density_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "vqtrain/errors.hpp"

namespace vqtrain {

DensityMatrix::DensityMatrix(int n_qubits)
    : n_(n_qubits), a_((size_t{1} << n_qubits) * (size_t{1} << n_qubits)) {
  a_[0] = cplx{1.0, 0.0};
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  DensityMatrix rho(n_qubits);
  const size_t d = rho.dim();
  rho.a_.assign(d * d, cplx{});
  for (size_t i = 0; i < d; ++i) rho.at(i, i) = cplx{1.0 / static_cast<double>(d), 0.0};
  return rho;
}

double DensityMatrix::trace_real() const {
  double tr = 0.0;
  for (size_t i = 0; i < dim(); ++i) tr += at(i, i).real();
  return tr;
}

std::vector<double> DensityMatrix::diagonal_probs() const {
  const size_t d = dim();
  std::vector<double> probs(d);
  double sum = 0.0;
  for (size_t i = 0; i < d; ++i) {
    probs[i] = std::max(0.0, at(i, i).real());
    sum += probs[i];
  }
  if (sum > 0.0) {
    for (double& p : probs) p /= sum;
  }
  return probs;
}

double DensityMatrix::hermiticity_defect() const {
  const size_t d = dim();
  double defect = 0.0;
  for (size_t r = 0; r < d; ++r) {
    for (size_t c = r; c < d; ++c) {
      defect = std::max(defect, std::abs(at(r, c) - std::conj(at(c, r))));
    }
  }
  return defect;
}

void DensityMatrix::apply_unitary_1q(int target, const std::array<cplx, 4>& u) {
  if (target < 0 || target >= n_) throw GateError("gate target out of range");
  const size_t d = dim();
  const size_t mask = size_t{1} << target;
  // Row transform rho <- U rho on target-bit pairs.
  for (size_t r = 0; r < d; ++r) {
    if (r & mask) continue;
    const size_t r1 = r | mask;
    for (size_t c = 0; c < d; ++c) {
      const cplx a = at(r, c);
      const cplx b = at(r1, c);
      at(r, c) = u[0] * a + u[1] * b;
      at(r1, c) = u[2] * a + u[3] * b;
    }
  }
  // Column transform rho <- rho U^dagger.
  const cplx u00c = std::conj(u[0]), u01c = std::conj(u[1]);
  const cplx u10c = std::conj(u[2]), u11c = std::conj(u[3]);
  for (size_t c = 0; c < d; ++c) {
    if (c & mask) continue;
    const size_t c1 = c | mask;
    for (size_t r = 0; r < d; ++r) {
      const cplx a = at(r, c);
      const cplx b = at(r, c1);
      at(r, c) = a * u00c + b * u01c;
      at(r, c1) = a * u10c + b * u11c;
    }
  }
}

void DensityMatrix::apply_cz(int control, int target) {
  if (control == target) throw GateError("controlled-Z targets must be distinct");
  if (control < 0 || control >= n_ || target < 0 || target >= n_) {
    throw GateError("gate target out of range");
  }
  const size_t d = dim();
  const size_t both = (size_t{1} << control) | (size_t{1} << target);
  for (size_t r = 0; r < d; ++r) {
    const bool r_flip = (r & both) == both;
    for (size_t c = 0; c < d; ++c) {
      const bool c_flip = (c & both) == both;
      if (r_flip != c_flip) at(r, c) = -at(r, c);
    }
  }
}

void DensityMatrix::depolarize(size_t qubit_mask, double p) {
  if (p < 0.0 || p > 1.0) throw NoiseError("depolarizing probability outside [0, 1]");
  if (p == 0.0) return;
  const size_t d = dim();
  const size_t full = d - 1;
  if ((qubit_mask & ~full) != 0) throw NoiseError("noise qubit mask out of range");

  int k = 0;
  for (size_t m = qubit_mask; m; m >>= 1) k += static_cast<int>(m & 1);
  const double inv_sub = 1.0 / static_cast<double>(size_t{1} << k);
  const size_t keep_mask = full & ~qubit_mask;

  // Partial trace over the masked qubits, indexed by the kept bits in place.
  std::vector<cplx> traced(d * d, cplx{});
  for (size_t r = 0; r < d; ++r) {
    for (size_t c = 0; c < d; ++c) {
      if ((r & qubit_mask) != (c & qubit_mask)) continue;
      traced[(r & keep_mask) * d + (c & keep_mask)] += at(r, c);
    }
  }
  for (size_t r = 0; r < d; ++r) {
    for (size_t c = 0; c < d; ++c) {
      cplx replaced{};
      if ((r & qubit_mask) == (c & qubit_mask)) {
        replaced = traced[(r & keep_mask) * d + (c & keep_mask)] * inv_sub;
      }
      at(r, c) = (1.0 - p) * at(r, c) + p * replaced;
    }
  }
}

DensityMatrix amplitude_encode(std::span<const double> x) {
  const size_t len = x.size();
  if (len == 0 || (len & (len - 1)) != 0) {
    throw EncodingError("amplitude encoding needs a power-of-two length");
  }
  double norm_sq = 0.0;
  for (double v : x) norm_sq += v * v;
  if (norm_sq == 0.0) throw EncodingError("cannot amplitude-encode the zero vector");
  const double inv_norm = 1.0 / std::sqrt(norm_sq);

  int n = 0;
  while ((size_t{1} << n) < len) ++n;
  DensityMatrix rho(n);
  for (size_t r = 0; r < len; ++r) {
    for (size_t c = 0; c < len; ++c) {
      rho.at(r, c) = cplx{x[r] * inv_norm * x[c] * inv_norm, 0.0};
    }
  }
  return rho;
}

}  // namespace vqtrain

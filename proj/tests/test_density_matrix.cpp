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
#include "vqtrain/density_matrix.hpp"
#include "vqtrain/errors.hpp"

using namespace vqtrain;

TEST_SUITE("density_matrix") {

TEST_CASE("amplitude encoding of basis and symmetric vectors") {
  const std::vector<double> basis{1.0, 0.0, 0.0, 0.0};
  DensityMatrix rho = amplitude_encode(basis);
  CHECK(rho.n_qubits() == 2);
  CHECK(rho.at(0, 0).real() == doctest::Approx(1.0).epsilon(1e-14));
  for (size_t r = 0; r < 4; ++r) {
    for (size_t c = 0; c < 4; ++c) {
      if (r != 0 || c != 0) CHECK(std::abs(rho.at(r, c)) < 1e-14);
    }
  }

  const std::vector<double> uniform{1.0, 1.0, 1.0, 1.0};
  rho = amplitude_encode(uniform);
  for (size_t r = 0; r < 4; ++r) {
    for (size_t c = 0; c < 4; ++c) {
      CHECK(rho.at(r, c).real() == doctest::Approx(0.25).epsilon(1e-14));
    }
  }

  const std::vector<double> pythagorean{3.0, 4.0, 0.0, 0.0};
  rho = amplitude_encode(pythagorean);
  CHECK(rho.at(0, 0).real() == doctest::Approx(0.36).epsilon(1e-14));
  CHECK(rho.at(1, 1).real() == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(rho.at(0, 1).real() == doctest::Approx(0.48).epsilon(1e-14));
  CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("amplitude encoding rejects bad inputs") {
  CHECK_THROWS_AS(amplitude_encode(std::vector<double>{0.0, 0.0, 0.0, 0.0}), EncodingError);
  CHECK_THROWS_AS(amplitude_encode(std::vector<double>{1.0, 2.0, 3.0}), EncodingError);
  CHECK_THROWS_AS(amplitude_encode(std::vector<double>{}), EncodingError);
}

TEST_CASE("depolarizing endpoints") {
  Rng rng(11);
  DensityMatrix rho = testing::random_state(2, rng);
  const DensityMatrix untouched = apply_depolarizing(rho, 0b11, 0.0);
  CHECK(testing::max_abs_diff(rho, untouched) == 0.0);

  const DensityMatrix mixed = apply_depolarizing(rho, 0b11, 1.0);
  CHECK(testing::max_abs_diff(mixed, DensityMatrix::maximally_mixed(2)) < 1e-14);

  CHECK_THROWS_AS(apply_depolarizing(rho, 0b11, -0.1), NoiseError);
  CHECK_THROWS_AS(apply_depolarizing(rho, 0b11, 1.5), NoiseError);
}

TEST_CASE("full-register channel scales a traceless parity by 1 - p") {
  const std::vector<double> basis{1.0, 0.0, 0.0, 0.0};
  const DensityMatrix rho = amplitude_encode(basis);
  const DensityMatrix noisy = apply_depolarizing(rho, 0b11, 0.1);
  const Observable zz = Observable::z_parity(2);
  CHECK(expectation(noisy, zz, Shots::analytic()) == doctest::Approx(0.9).epsilon(1e-13));

  // Same identity on random mixed states, several p values.
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix state = testing::random_state(2, rng);
    const double ideal = expectation(state, zz, Shots::analytic());
    for (double p : {0.05, 0.3, 0.77}) {
      const DensityMatrix out = apply_depolarizing(state, 0b11, p);
      CHECK(expectation(out, zz, Shots::analytic()) ==
            doctest::Approx((1.0 - p) * ideal).epsilon(1e-12));
    }
  }
}

TEST_CASE("partial depolarizing matches the traced formula on one qubit") {
  Rng rng(5);
  const DensityMatrix rho = testing::random_state(2, rng);
  const double p = 0.37;
  const DensityMatrix out = apply_depolarizing(rho, 0b01, p);  // qubit 0 only

  // Expected: (1-p) rho + p (I/2 tensor rho_1) with rho_1 = Tr_0 rho.
  // Basis index = q1 q0, so Tr_0 sums the qubit-0 bit.
  for (size_t r1 = 0; r1 < 2; ++r1) {
    for (size_t c1 = 0; c1 < 2; ++c1) {
      const cplx traced = rho.at(r1 * 2 + 0, c1 * 2 + 0) + rho.at(r1 * 2 + 1, c1 * 2 + 1);
      for (size_t r0 = 0; r0 < 2; ++r0) {
        for (size_t c0 = 0; c0 < 2; ++c0) {
          const cplx expected = (1.0 - p) * rho.at(r1 * 2 + r0, c1 * 2 + c0) +
                                (r0 == c0 ? p * 0.5 * traced : cplx{});
          CHECK(std::abs(out.at(r1 * 2 + r0, c1 * 2 + c0) - expected) < 1e-14);
        }
      }
    }
  }
  CHECK(out.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("channels and encodings preserve state invariants") {
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    DensityMatrix rho = testing::random_state(2, rng);
    const double p = rng.uniform();
    const size_t mask = 1 + rng.below(3);
    rho.depolarize(mask, p);
    CHECK(std::abs(rho.trace_real() - 1.0) < 1e-10);
    CHECK(rho.hermiticity_defect() < 1e-10);
    CHECK(testing::min_eigenvalue(rho) > -1e-9);
  }
}

}  // TEST_SUITE

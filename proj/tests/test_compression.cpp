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
#include "vqtrain/compression.hpp"
#include "vqtrain/errors.hpp"
#include "vqtrain/runtime.hpp"

using namespace vqtrain;

TEST_SUITE("compression") {

TEST_CASE("clipping splits around the threshold") {
  const std::vector<double> acc{0.5, 0.05};
  const ClipResult r = clip_and_mask(acc, 0.1);
  CHECK(r.transmit == std::vector<double>{0.5, 0.0});
  CHECK(r.keep == std::vector<double>{0.0, 0.05});
  CHECK(r.mask == std::vector<uint8_t>{1, 0});

  // thr = 0 sends everything nonzero.
  const std::vector<double> some{0.3, 0.0, -0.2};
  const ClipResult all = clip_and_mask(some, 0.0);
  CHECK(all.transmit == std::vector<double>{0.3, 0.0, -0.2});
  CHECK(all.keep == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(all.mask == std::vector<uint8_t>{1, 0, 1});

  CHECK_THROWS_AS(clip_and_mask(some, -0.5), SpecError);
}

TEST_CASE("clip invariants on random vectors") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> acc(16);
    for (double& v : acc) v = rng.normal(0.0, 0.5);
    const double thr = 0.3 * rng.uniform();
    const ClipResult r = clip_and_mask(acc, thr);
    for (size_t j = 0; j < acc.size(); ++j) {
      CHECK(r.transmit[j] * r.keep[j] == 0.0);            // disjoint
      CHECK(r.transmit[j] + r.keep[j] == acc[j]);          // exact split
      CHECK(static_cast<bool>(r.mask[j]) == (std::abs(acc[j]) > thr));
      if (!r.mask[j]) CHECK(std::abs(r.keep[j]) <= thr);   // residual stays small
    }
  }
}

TEST_CASE("residuals accumulate across iterations until they beat thr") {
  // 0.05 kept, then +0.06 pushes the accumulated value over 0.1.
  std::vector<double> residual{0.0};
  const double thr = 0.1;
  ClipResult first = clip_and_mask(std::vector<double>{residual[0] + 0.05}, thr);
  CHECK(first.mask[0] == 0);
  residual[0] = first.keep[0];
  ClipResult second = clip_and_mask(std::vector<double>{residual[0] + 0.06}, thr);
  CHECK(second.mask[0] == 1);
  CHECK(second.transmit[0] == doctest::Approx(0.11).epsilon(1e-15));
}

TEST_CASE("compression ratio formula") {
  CHECK(compression_ratio(100, 100) == 0.0);
  CHECK(compression_ratio(0, 500) == 1.0);
  CHECK(compression_ratio(7016, 2324 * 8) == doctest::Approx(1.0 - 7016.0 / 18592.0).epsilon(1e-15));
  CHECK(compression_ratio(7016, 2324 * 8) == doctest::Approx(0.6226).epsilon(1e-4));
  CHECK_THROWS_AS(compression_ratio(1, 0), LedgerError);
}

TEST_CASE("zero threshold reproduces the uncompressed trajectory") {
  const std::vector<Sample> train_set = testing::toy_batch();
  TrainConfig config;
  config.profiles = {NoiseProfile::from_p1(0, 0.01), NoiseProfile::from_p1(1, 0.02)};
  config.shots = Shots::sampled(128);
  config.max_iterations = 20;
  config.run_convergence_test = false;
  config.seed = 17;

  const TrainResult plain = train(config, train_set);
  config.compression_threshold = 0.0;
  const TrainResult thr0 = train(config, train_set);
  CHECK(plain.theta.values == thr0.theta.values);
  for (size_t i = 0; i < plain.history.size(); ++i) {
    CHECK(plain.history[i].grad_norm == thr0.history[i].grad_norm);
  }
}

TEST_CASE("ledger bookkeeping is lossless and masks drive CV") {
  const std::vector<Sample> train_set = testing::toy_batch();
  TrainConfig config;
  config.profiles = {NoiseProfile::from_p1(0, 0.012), NoiseProfile::from_p1(1, 0.02),
                     NoiseProfile::from_p1(2, 0.008), NoiseProfile::from_p1(3, 0.016)};
  config.shots = Shots::sampled(512);
  config.max_iterations = 30;
  config.run_convergence_test = false;
  config.compression_threshold = 0.05;
  config.alternate = true;  // residuals must follow groups, not nodes
  config.seed = 23;

  const TrainResult result = train(config, train_set);

  // CV equals the mask bits summed over iterations and nodes.
  long cv = 0;
  for (const auto& row : result.ledger.per_iteration) cv += row.transmitted;
  CHECK(cv == result.ledger.transmitted_components);
  CHECK(cv < 8 * result.iterations);  // something was actually clipped

  // transmitted + final residual == raw total, componentwise.
  const Partition partition = partition_parameters(8, 4);
  for (int g = 0; g < 4; ++g) {
    for (int j = partition.ranges[g].lo; j < partition.ranges[g].hi; ++j) {
      const double residual = result.final_residuals.by_group[g][j - partition.ranges[g].lo];
      const double sent = result.ledger.transmitted_sum[j];
      const double raw = result.ledger.raw_sum[j];
      CHECK(sent + residual ==
            doctest::Approx(raw).epsilon(1e-9).scale(std::max(1.0, std::abs(raw))));
      // A residual at rest never exceeds the threshold.
      CHECK(std::abs(residual) <= 0.05);
    }
  }
}

TEST_CASE("an enormous threshold transmits nothing and parks everything in residuals") {
  const std::vector<Sample> train_set = testing::toy_batch();
  TrainConfig config;
  config.profiles = {NoiseProfile::from_p1(0, 0.01), NoiseProfile::from_p1(1, 0.01)};
  config.shots = Shots::analytic();
  config.max_iterations = 5;
  config.run_convergence_test = false;
  config.compression_threshold = 1e9;
  config.alternate = true;
  config.seed = 5;
  const TrainResult result = train(config, train_set);
  CHECK(result.ledger.transmitted_components == 0);
  for (int j = 0; j < 8; ++j) CHECK(result.ledger.transmitted_sum[j] == 0.0);
  // Residual = everything raw, attached to groups across the cyclic shifts.
  const Partition partition = partition_parameters(8, 2);
  for (int g = 0; g < 2; ++g) {
    for (int j = partition.ranges[g].lo; j < partition.ranges[g].hi; ++j) {
      CHECK(result.final_residuals.by_group[g][j - partition.ranges[g].lo] ==
            doctest::Approx(result.ledger.raw_sum[j]).epsilon(1e-12));
    }
  }
  // Parameters never moved: Adam saw identically zero gradients.
  Rng init(derive_seed(5, {stream::kInitParams}));
  const ParameterVector untouched = ParameterVector::random(8, init);
  CHECK(result.theta.values == untouched.values);
}

}  // TEST_SUITE

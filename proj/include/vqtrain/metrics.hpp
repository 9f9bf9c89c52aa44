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

#ifndef VQTRAIN_METRICS_HPP_
#define VQTRAIN_METRICS_HPP_

#include <span>
#include <vector>

namespace vqtrain {

// Smoothness and Lipschitz constants of the regularized MSE loss for a
// d-parameter model; the plain-SGD theory runs step with eta = 1/S.
double smoothness_constant(int d, double lambda);  // (3/2 + lambda) d^2
double lipschitz_constant(int d, double lambda);   // d (1 + 3 pi lambda)

struct TheoryParams {
  int d = 8;
  double lambda = 0.0;
  long shots = 8192;       // K
  long dataset_size = 75;  // N_D
  long iterations = 100;   // T
  double p_max = 0.0;      // largest merged depolarizing probability

  double smoothness() const { return smoothness_constant(d, lambda); }
  double lipschitz() const { return lipschitz_constant(d, lambda); }
};

// Circuit-count speed-up of M nodes against one, assuming every circuit
// costs the same wall time: (1 + 2d) / (1 + 2d/M).
double ideal_speedup(int d, int num_nodes);

struct ConvergenceRecord {
  double iterations = 0.0;  // mean over repetitions is allowed
  bool converged = false;
};

// (1 + 2d) N_I^1 / ((1 + 2d/M) N_I^M) from two recorded runs.
double measured_speedup(const ConvergenceRecord& single_node, const ConvergenceRecord& multi_node,
                        int d, int num_nodes);

// Mean squared Euclidean norm of the final-iterate clean gradient over runs.
double r1_metric(std::span<const std::vector<double>> final_gradients);

// Upper bound on the expected squared gradient norm after T iterations of
// the 1/S-step rule under merged depolarizing noise and K-shot readout.
double r1_upper_bound(const TheoryParams& params);

// Rank correlation in [-1, 1]; ties count as neither concordant nor
// discordant (tau-a numerator over all pairs).
double kendall_tau(std::span<const double> x, std::span<const double> y);

}  // namespace vqtrain

#endif  // VQTRAIN_METRICS_HPP_

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

#ifndef VQTRAIN_RUNTIME_HPP_
#define VQTRAIN_RUNTIME_HPP_

#include <optional>
#include <span>
#include <vector>

#include "vqtrain/compression.hpp"
#include "vqtrain/gradient.hpp"
#include "vqtrain/model.hpp"

namespace vqtrain {

// Disjoint contiguous parameter slices covering 0..d-1, one per worker.
struct Partition {
  std::vector<IndexRange> ranges;

  int groups() const { return static_cast<int>(ranges.size()); }
  std::vector<int> sizes() const;
};

// Near-equal contiguous split; group i gets [i*d/M, (i+1)*d/M).
Partition partition_parameters(int d, int num_nodes);

// Cyclic group-to-node assignment for iteration t: group g is handled by
// node (g + t) mod M, the identity at t = 0. Over M consecutive iterations
// every group visits every node exactly once.
std::vector<int> assign_alternate(long iteration, int num_nodes);

// One worker's gradient contribution for one iteration. For compressed
// runs indices cover only the components whose accumulated magnitude beat
// the threshold.
struct GradientMessage {
  int node_id = 0;
  long iteration = 0;
  std::vector<int> indices;
  std::vector<double> values;
  long circuit_executions = 0;
};

// Computes the slice gradient a node owes the server this iteration.
// `expected_group` lets a worker cross-check the server-assigned slice
// against the schedule it derived itself.
GradientMessage worker_step(const Model& model, int node_id, long iteration,
                            const ParameterVector& params, IndexRange group,
                            std::span<const Sample> batch, const NoiseProfile& profile,
                            Shots shots, double lambda, uint64_t seed,
                            Exec exec = Exec::kSerial,
                            std::optional<IndexRange> expected_group = std::nullopt);

// Dense gradient assembled by index placement only. Throws BarrierTimeout if
// fewer than expected_messages arrived and ProtocolError on index overlap
// (or, when require_cover, on gaps).
GradientVector aggregate(std::span<const GradientMessage> messages, int d,
                         int expected_messages, bool require_cover = true);

struct AdamConfig {
  double alpha = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

enum class OptimizerKind { kAdam, kPlainSgd };

// Central server side of the loop: parameters, optimizer moments, counters.
struct ServerState {
  ParameterVector theta;
  AdamState adam;
  long iteration = 0;
  CommLedger ledger;
};

// Bias-corrected Adam step; angles wrap back into [0, 2*pi).
void adam_update(ServerState& state, const GradientVector& gradient, const AdamConfig& config);
// theta <- theta - eta * g, for the fixed-step theory runs.
void sgd_update(ServerState& state, const GradientVector& gradient, double eta);

struct ConvergenceResult {
  bool converged = false;
  double accuracy = 0.0;
  double loss = 0.0;
};

// Runs the model over `dataset` on one node's noise profile and tests the
// accuracy threshold (>= by default, > when strict).
ConvergenceResult convergence_test(const Model& model, const ParameterVector& params,
                                   const NoiseProfile& profile, std::span<const Sample> dataset,
                                   double threshold, bool strict, Shots shots, uint64_t seed,
                                   Exec exec = Exec::kSerial);

struct HistoryRow {
  long iteration = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double grad_norm = 0.0;
  long transmitted = 0;
  long circuits = 0;
};

struct TrainConfig {
  int n_qubits = 2;
  int layers = 4;
  NoiseMode noise_mode = NoiseMode::kPerGate;
  std::vector<NoiseProfile> profiles;  // one per node
  Shots shots = Shots::sampled(8192);
  int batch_size = 5;
  double lambda = 0.0;
  long max_iterations = 10000;
  double accuracy_threshold = 0.96;
  bool strict_threshold = false;
  bool alternate = false;
  std::optional<double> compression_threshold;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamConfig adam;
  double sgd_eta = 0.0;
  // -1 picks the node with the smallest p1 (ties to the lower id); the
  // choice stays fixed for the whole run.
  int convergence_node = -1;
  // Theory runs disable the test and always execute max_iterations.
  bool run_convergence_test = true;
  uint64_t seed = 1;
  Exec exec = Exec::kSerial;

  int num_nodes() const { return static_cast<int>(profiles.size()); }
  void validate() const;
};

struct TrainResult {
  ParameterVector theta;
  long iterations = 0;
  bool converged = false;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  CommLedger ledger;
  std::vector<HistoryRow> history;
  // Untransmitted gradient mass per group at the end of a compressed run;
  // empty groups of zeros for uncompressed runs.
  ResidualStore final_residuals;
};

int pick_convergence_node(const TrainConfig& config);

// One training round seen from the server: hand every group's slice to its
// scheduled node and collect the gradient messages back. The in-process
// executor calls workers directly; the socket transport implements the same
// contract over the wire, so both share one training loop.
class RoundExecutor {
 public:
  virtual ~RoundExecutor() = default;
  virtual std::vector<GradientMessage> execute(long iteration, const ParameterVector& theta,
                                               std::span<const Sample> batch,
                                               std::span<const size_t> batch_indices,
                                               const std::vector<int>& node_of_group) = 0;
  // Called once after the loop ends (converged or capped).
  virtual void finish(const TrainResult& result) { (void)result; }
  // Residuals and raw componentwise totals, when the executor can see them.
  virtual ResidualStore residuals() const { return {}; }
  virtual const std::vector<double>* raw_component_sums() const { return nullptr; }
};

// The synchronous training loop: partition, parallel slice gradients, a
// full barrier, merge, optimizer step, convergence test. Hitting the
// iteration cap is reported via converged=false, not an error.
TrainResult train(const TrainConfig& config, std::span<const Sample> train_set);

// Same loop with a caller-provided transport.
TrainResult train_with_executor(const TrainConfig& config, std::span<const Sample> train_set,
                                RoundExecutor& executor);

// train() with gradient compression made explicit: requires a threshold in
// the config, workers accumulate residuals and transmit only what clears it.
TrainResult train_compressed(const TrainConfig& config, std::span<const Sample> train_set);

}  // namespace vqtrain

#endif  // VQTRAIN_RUNTIME_HPP_

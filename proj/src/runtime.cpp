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

#include "vqtrain/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vqtrain/errors.hpp"

namespace vqtrain {

std::vector<int> Partition::sizes() const {
  std::vector<int> sizes;
  sizes.reserve(ranges.size());
  for (const auto& range : ranges) sizes.push_back(range.size());
  return sizes;
}

Partition partition_parameters(int d, int num_nodes) {
  if (num_nodes < 1) throw PartitionError("need at least one node");
  if (num_nodes > d) throw PartitionError("more nodes than parameters");
  Partition partition;
  partition.ranges.reserve(num_nodes);
  for (int i = 0; i < num_nodes; ++i) {
    const int lo = static_cast<int>(static_cast<long>(i) * d / num_nodes);
    const int hi = static_cast<int>(static_cast<long>(i + 1) * d / num_nodes);
    partition.ranges.push_back({lo, hi});
  }
  return partition;
}

std::vector<int> assign_alternate(long iteration, int num_nodes) {
  if (iteration < 0) throw SpecError("iteration must be nonnegative");
  std::vector<int> node_of_group(num_nodes);
  for (int g = 0; g < num_nodes; ++g) {
    node_of_group[g] = static_cast<int>((g + iteration) % num_nodes);
  }
  return node_of_group;
}

GradientMessage worker_step(const Model& model, int node_id, long iteration,
                            const ParameterVector& params, IndexRange group,
                            std::span<const Sample> batch, const NoiseProfile& profile,
                            Shots shots, double lambda, uint64_t seed, Exec exec,
                            std::optional<IndexRange> expected_group) {
  if (expected_group.has_value() && !(group == *expected_group)) {
    throw ProtocolError("assigned parameter group does not match the schedule");
  }
  const GradientVector grad =
      parameter_shift_gradient(model, batch, params, group, profile, shots, lambda, seed, exec);
  GradientMessage message;
  message.node_id = node_id;
  message.iteration = iteration;
  message.indices.reserve(group.size());
  message.values.reserve(group.size());
  for (int j = group.lo; j < group.hi; ++j) {
    message.indices.push_back(j);
    message.values.push_back(grad.values[j]);
  }
  message.circuit_executions = grad.circuit_executions;
  return message;
}

GradientVector aggregate(std::span<const GradientMessage> messages, int d, int expected_messages,
                         bool require_cover) {
  if (static_cast<int>(messages.size()) < expected_messages) {
    throw BarrierTimeout("missing gradient messages at the synchronization barrier");
  }
  GradientVector merged;
  merged.values.assign(d, 0.0);
  std::vector<uint8_t> seen(d, 0);
  for (const auto& message : messages) {
    if (message.indices.size() != message.values.size()) {
      throw ProtocolError("gradient message indices and values differ in length");
    }
    for (size_t k = 0; k < message.indices.size(); ++k) {
      const int j = message.indices[k];
      if (j < 0 || j >= d) throw ProtocolError("gradient component index out of range");
      if (seen[j]) throw ProtocolError("gradient component reported by two nodes");
      seen[j] = 1;
      merged.values[j] = message.values[k];
    }
    merged.circuit_executions += message.circuit_executions;
  }
  if (require_cover) {
    for (int j = 0; j < d; ++j) {
      if (!seen[j]) throw ProtocolError("aggregated gradient does not cover all components");
    }
  }
  return merged;
}

void adam_update(ServerState& state, const GradientVector& gradient, const AdamConfig& config) {
  const size_t d = state.theta.size();
  if (gradient.values.size() != d) throw ShapeError("gradient length does not match theta");
  for (double g : gradient.values) {
    if (!std::isfinite(g)) throw NumericsError("non-finite gradient component");
  }
  if (state.adam.m.size() != d) {
    state.adam.m.assign(d, 0.0);
    state.adam.v.assign(d, 0.0);
  }
  ++state.adam.step;
  const double corr1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.adam.step));
  const double corr2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.adam.step));
  for (size_t j = 0; j < d; ++j) {
    const double g = gradient.values[j];
    state.adam.m[j] = config.beta1 * state.adam.m[j] + (1.0 - config.beta1) * g;
    state.adam.v[j] = config.beta2 * state.adam.v[j] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.adam.m[j] / corr1;
    const double v_hat = state.adam.v[j] / corr2;
    state.theta.values[j] -= config.alpha * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  state.theta.wrap();
}

void sgd_update(ServerState& state, const GradientVector& gradient, double eta) {
  const size_t d = state.theta.size();
  if (gradient.values.size() != d) throw ShapeError("gradient length does not match theta");
  for (double g : gradient.values) {
    if (!std::isfinite(g)) throw NumericsError("non-finite gradient component");
  }
  for (size_t j = 0; j < d; ++j) {
    state.theta.values[j] -= eta * gradient.values[j];
  }
  state.theta.wrap();
}

ConvergenceResult convergence_test(const Model& model, const ParameterVector& params,
                                   const NoiseProfile& profile, std::span<const Sample> dataset,
                                   double threshold, bool strict, Shots shots, uint64_t seed,
                                   Exec exec) {
  if (dataset.empty()) throw DataError("convergence test over an empty dataset");
  if (threshold <= 0.0 || threshold > 1.0) throw SpecError("accuracy threshold outside (0, 1]");
  const long n = static_cast<long>(dataset.size());
  std::vector<double> predictions(dataset.size());
  std::vector<double> labels(dataset.size());
  const bool parallel = exec == Exec::kParallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (long k = 0; k < n; ++k) {
    labels[k] = dataset[k].label;
    if (shots.is_analytic()) {
      predictions[k] = predict(model, dataset[k].features, params, profile, shots, nullptr);
    } else {
      Rng rng(derive_seed(seed, {static_cast<uint64_t>(k)}));
      predictions[k] = predict(model, dataset[k].features, params, profile, shots, &rng);
    }
  }
  ConvergenceResult result;
  result.accuracy = classification_accuracy(predictions, labels);
  result.loss = mse_loss(predictions, labels, params, 0.0);
  result.converged = strict ? result.accuracy > threshold : result.accuracy >= threshold;
  return result;
}

void TrainConfig::validate() const {
  if (profiles.empty()) throw ConfigError("at least one node profile is required");
  for (const auto& profile : profiles) profile.validate();
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (max_iterations < 1) throw ConfigError("iteration cap must be positive");
  if (compression_threshold.has_value() && *compression_threshold < 0.0) {
    throw ConfigError("compression threshold must be nonnegative");
  }
  if (optimizer == OptimizerKind::kPlainSgd && sgd_eta <= 0.0) {
    throw ConfigError("plain SGD needs a positive step size");
  }
}

int pick_convergence_node(const TrainConfig& config) {
  if (config.convergence_node >= 0) {
    if (config.convergence_node >= config.num_nodes()) {
      throw ConfigError("convergence node index out of range");
    }
    return config.convergence_node;
  }
  int best = 0;
  for (int i = 1; i < config.num_nodes(); ++i) {
    if (config.profiles[i].p1 < config.profiles[best].p1) best = i;
  }
  return best;
}

namespace {

// Seeded epoch-cycling batch sampler over the training set.
class BatchSchedule {
 public:
  BatchSchedule(size_t dataset_size, int batch_size, uint64_t seed)
      : rng_(seed), order_(dataset_size), cursor_(dataset_size), batch_(batch_size) {
    std::iota(order_.begin(), order_.end(), size_t{0});
  }

  std::vector<size_t> next() {
    std::vector<size_t> indices;
    indices.reserve(batch_);
    for (int i = 0; i < batch_; ++i) {
      if (cursor_ >= order_.size()) {
        rng_.shuffle(order_);
        cursor_ = 0;
      }
      indices.push_back(order_[cursor_++]);
    }
    return indices;
  }

 private:
  Rng rng_;
  std::vector<size_t> order_;
  size_t cursor_;
  int batch_;
};

}  // namespace

namespace {

// Default transport: workers run in this process, one OpenMP task per group.
class InProcessExecutor : public RoundExecutor {
 public:
  InProcessExecutor(const TrainConfig& config, const Model& model, const Partition& partition)
      : config_(config),
        model_(model),
        partition_(partition),
        residuals_(ResidualStore::zeros(partition.sizes())),
        raw_sum_(model.circuit.param_count(), 0.0) {}

  std::vector<GradientMessage> execute(long iteration, const ParameterVector& theta,
                                       std::span<const Sample> batch,
                                       std::span<const size_t> /*batch_indices*/,
                                       const std::vector<int>& node_of_group) override {
    const int num_nodes = config_.num_nodes();
    const bool compressed = config_.compression_threshold.has_value();
    const bool parallel_nodes = config_.exec == Exec::kParallel;
    std::vector<GradientMessage> messages(num_nodes);

#pragma omp parallel for schedule(static) if (parallel_nodes)
    for (int g = 0; g < num_nodes; ++g) {
      const int node = node_of_group[g];
      const uint64_t worker_seed =
          derive_seed(config_.seed, {stream::kWorker, static_cast<uint64_t>(iteration),
                                     static_cast<uint64_t>(node)});
      GradientMessage message =
          worker_step(model_, node, iteration, theta, partition_.ranges[g], batch,
                      config_.profiles[node], config_.shots, config_.lambda, worker_seed,
                      config_.exec, partition_.ranges[g]);
      // Raw totals for the conservation ledger. Groups own disjoint index
      // ranges, so these writes never collide across the parallel loop.
      for (size_t k = 0; k < message.indices.size(); ++k) {
        raw_sum_[message.indices[k]] += message.values[k];
      }
      if (compressed) {
        // Accumulate into the group's residual, send only what beats thr.
        std::vector<double>& residual = residuals_.by_group[g];
        for (size_t k = 0; k < message.values.size(); ++k) {
          residual[k] += message.values[k];
        }
        const ClipResult clipped = clip_and_mask(residual, *config_.compression_threshold);
        GradientMessage sparse;
        sparse.node_id = message.node_id;
        sparse.iteration = message.iteration;
        sparse.circuit_executions = message.circuit_executions;
        for (size_t k = 0; k < clipped.mask.size(); ++k) {
          if (clipped.mask[k]) {
            sparse.indices.push_back(partition_.ranges[g].lo + static_cast<int>(k));
            sparse.values.push_back(clipped.transmit[k]);
          }
        }
        residual = clipped.keep;
        messages[g] = std::move(sparse);
      } else {
        messages[g] = std::move(message);
      }
    }
    return messages;
  }

  ResidualStore residuals() const override { return residuals_; }
  const std::vector<double>* raw_component_sums() const override { return &raw_sum_; }

 private:
  const TrainConfig& config_;
  const Model& model_;
  const Partition& partition_;
  ResidualStore residuals_;
  std::vector<double> raw_sum_;
};

}  // namespace

TrainResult train(const TrainConfig& config, std::span<const Sample> train_set) {
  config.validate();
  const Model model = make_classifier(config.n_qubits, config.layers, config.noise_mode);
  const Partition partition =
      partition_parameters(model.circuit.param_count(), config.num_nodes());
  InProcessExecutor executor(config, model, partition);
  return train_with_executor(config, train_set, executor);
}

TrainResult train_compressed(const TrainConfig& config, std::span<const Sample> train_set) {
  if (!config.compression_threshold.has_value()) {
    throw ConfigError("compressed training needs a threshold");
  }
  return train(config, train_set);
}

TrainResult train_with_executor(const TrainConfig& config, std::span<const Sample> train_set,
                                RoundExecutor& executor) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");

  const Model model = make_classifier(config.n_qubits, config.layers, config.noise_mode);
  const int d = model.circuit.param_count();
  const int num_nodes = config.num_nodes();
  const int conv_node = pick_convergence_node(config);
  const bool compressed = config.compression_threshold.has_value();

  ServerState server;
  {
    Rng init_rng(derive_seed(config.seed, {stream::kInitParams}));
    server.theta = ParameterVector::random(d, init_rng);
  }
  server.ledger.raw_sum.assign(d, 0.0);
  server.ledger.transmitted_sum.assign(d, 0.0);

  BatchSchedule batches(train_set.size(), config.batch_size,
                        derive_seed(config.seed, {stream::kBatchShuffle}));

  TrainResult result;
  std::vector<Sample> batch(config.batch_size);

  for (long t = 0; t < config.max_iterations; ++t) {
    server.ledger.start_iteration(t + 1);
    const std::vector<size_t> batch_indices = batches.next();
    for (int i = 0; i < config.batch_size; ++i) batch[i] = train_set[batch_indices[i]];

    const std::vector<int> node_of_group =
        config.alternate ? assign_alternate(t, num_nodes)
                         : assign_alternate(0, num_nodes);

    const std::vector<GradientMessage> messages =
        executor.execute(t, server.theta, batch, batch_indices, node_of_group);

    // Synchronization barrier: merge everything into one dense gradient.
    GradientVector merged = aggregate(messages, d, num_nodes, /*require_cover=*/!compressed);
    long transmitted = 0;
    for (int g = 0; g < num_nodes; ++g) {
      transmitted += static_cast<long>(messages[g].indices.size());
      server.ledger.add_circuits(messages[g].circuit_executions);
      for (size_t k = 0; k < messages[g].indices.size(); ++k) {
        server.ledger.transmitted_sum[messages[g].indices[k]] += messages[g].values[k];
      }
    }
    server.ledger.add_transmission(transmitted);

    if (config.optimizer == OptimizerKind::kAdam) {
      adam_update(server, merged, config.adam);
    } else {
      sgd_update(server, merged, config.sgd_eta);
    }
    server.iteration = t + 1;

    HistoryRow row;
    row.iteration = t + 1;
    row.grad_norm = std::sqrt(merged.norm_squared());
    row.transmitted = transmitted;
    row.circuits = server.ledger.per_iteration.back().circuits;

    if (config.run_convergence_test) {
      const uint64_t conv_seed = derive_seed(
          config.seed, {stream::kConvergenceTest, static_cast<uint64_t>(t)});
      const ConvergenceResult conv =
          convergence_test(model, server.theta, config.profiles[conv_node], train_set,
                           config.accuracy_threshold, config.strict_threshold, config.shots,
                           conv_seed, config.exec);
      row.loss = conv.loss;
      row.train_accuracy = conv.accuracy;
      result.final_accuracy = conv.accuracy;
      result.final_loss = conv.loss;
      result.history.push_back(row);
      if (conv.converged) {
        result.converged = true;
        result.iterations = t + 1;
        break;
      }
    } else {
      row.loss = std::numeric_limits<double>::quiet_NaN();
      row.train_accuracy = std::numeric_limits<double>::quiet_NaN();
      result.history.push_back(row);
    }
  }

  if (!result.converged) result.iterations = static_cast<long>(result.history.size());
  result.theta = server.theta;
  if (const std::vector<double>* raw = executor.raw_component_sums()) {
    server.ledger.raw_sum = *raw;
  } else if (!compressed) {
    // Without clipping the transmitted values are the raw values, so the
    // conservation totals hold on transports that never see raw gradients.
    server.ledger.raw_sum = server.ledger.transmitted_sum;
  }
  result.ledger = std::move(server.ledger);
  result.final_residuals = executor.residuals();
  executor.finish(result);
  return result;
}

}  // namespace vqtrain

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

#ifndef VQTRAIN_HARNESS_HPP_
#define VQTRAIN_HARNESS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "vqtrain/dataset.hpp"
#include "vqtrain/metrics.hpp"
#include "vqtrain/noise_lab.hpp"
#include "vqtrain/runtime.hpp"

namespace vqtrain {

// Where each repetition's node noise comes from.
struct NoiseSource {
  enum class Kind { kGaussian, kFixed, kDifferTargeted };
  Kind kind = Kind::kGaussian;
  double mu = 0.016;            // kGaussian: fresh draws per repetition
  NoiseInstance fixed;          // kFixed: the same instance for every run
  double differ_target = 0.0;   // kDifferTargeted: one instance per config
  double differ_mean = 0.04;
};

struct ExperimentConfig {
  std::string label;
  int num_nodes = 1;
  int layers = 4;
  NoiseMode noise_mode = NoiseMode::kPerGate;
  NoiseSource noise;
  long shots = 8192;  // 0 = analytic expectations
  int batch_size = 5;
  double lambda = 0.0;
  double accuracy_threshold = 0.96;
  bool strict_threshold = false;
  bool alternate = false;
  std::optional<double> compression_threshold;
  int repetitions = 20;
  long max_iterations = 10000;
  bool normalize_features = false;
  bool resample_split = true;  // fresh 75/25 split each repetition
  uint64_t seed = 1;
  Exec exec = Exec::kParallel;

  std::string to_json_string() const;
  static ExperimentConfig from_json_string(const std::string& text);
  uint64_t hash() const;
};

// Scalar outcome of one repetition; the per-iteration rows live in history.
struct RunRecord {
  int repetition = 0;
  uint64_t run_seed = 0;
  bool converged = false;
  long iterations = 0;
  long circuits = 0;
  long transmitted = 0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  double test_accuracy = 0.0;
  std::vector<HistoryRow> history;
};

struct RunArtifact {
  std::string config_json;
  uint64_t config_hash = 0;
  std::vector<RunRecord> runs;

  int converged_count() const;
  // Mean iteration count with non-converged runs censored at their cap.
  double mean_iterations() const;
  // Mean over converged runs only; nullopt when none converged.
  std::optional<double> mean_converged_iterations() const;
  long total_transmitted() const;
  long total_circuits() const;
};

// Runs `repetitions` independent trainings with derived seeds, in parallel
// when the config asks for it.
RunArtifact run_experiment(const ExperimentConfig& config, const Dataset& dataset);

// Iteration-count speed-up of a multi-node artifact against its single-node
// baseline: repetitions are paired by index and only pairs where both runs
// converged contribute. Throws SpeedupUndefined when no pair converged.
double paired_speedup(const RunArtifact& single_node, const RunArtifact& multi_node, int d,
                      int num_nodes);

// File emission. history CSV columns:
//   run,iteration,loss,train_acc,grad_norm,transmitted_components,circuits
void emit_history_csv(const RunArtifact& artifact, const std::string& path);
void emit_summary_json(const RunArtifact& artifact, const std::string& path);
// Reload of everything emit_summary_json wrote (histories stay in the CSV).
RunArtifact load_summary_json(const std::string& path);
// Equality of the summary view (ignores per-iteration histories).
bool summary_equal(const RunArtifact& a, const RunArtifact& b);

// ---- Sweep drivers -------------------------------------------------------

struct NoiseSweepCell {
  int num_nodes = 0;
  double mu = 0.0;
  RunArtifact artifact;
};

// Full grid of (M, mu) trainings sharing the sweep seed.
std::vector<NoiseSweepCell> sweep_noise(const ExperimentConfig& base,
                                        const std::vector<int>& node_counts,
                                        const std::vector<double>& mus, const Dataset& dataset);
void emit_noise_sweep_csv(const std::vector<NoiseSweepCell>& cells, const std::string& path);

struct DifferSweepCell {
  double differ = 0.0;
  int instance = 0;
  bool alternate = false;
  NoiseInstance noise;
  RunArtifact artifact;
};

// For each differ target: `instances` generated noise settings, each trained
// with alternate scheduling off and on, plus one single-node baseline
// artifact (shared across targets) at p1 = mean.
struct DifferSweep {
  RunArtifact baseline;  // M = 1 at the differ mean
  std::vector<DifferSweepCell> cells;
};

DifferSweep sweep_differ(const ExperimentConfig& base, const std::vector<double>& differs,
                         int instances, const Dataset& dataset);
void emit_differ_sweep_csv(const DifferSweep& sweep, int d, const std::string& path);

struct ThresholdSweepCell {
  double threshold = 0.0;  // negative marks the uncompressed baseline cell
  RunArtifact artifact;
};

// Threshold grid including an uncompressed baseline cell (threshold < 0).
std::vector<ThresholdSweepCell> sweep_threshold(const ExperimentConfig& base,
                                                const std::vector<double>& thresholds,
                                                const Dataset& dataset);
void emit_threshold_sweep_csv(const std::vector<ThresholdSweepCell>& cells,
                              const RunArtifact& single_node_baseline, int d,
                              const std::string& path);

// ---- Theory runs ---------------------------------------------------------

struct TheoryPoint {
  TheoryParams params;
  double observed_r1 = 0.0;
  double bound = 0.0;
  int runs = 0;
};

// Fixed-length plain-SGD (eta = 1/S) full-batch runs under merged noise with
// the largest merged probability pinned to p_max; observed R1 is the mean
// final-iterate clean squared gradient norm over the repetitions.
TheoryPoint run_theory_point(const Dataset& dataset, int num_nodes, double p_max, long iterations,
                             long shots, int runs, uint64_t seed, Exec exec);
void emit_theory_csv(const std::vector<TheoryPoint>& points, const std::string& path);

}  // namespace vqtrain

#endif  // VQTRAIN_HARNESS_HPP_

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

#include "vqtrain/harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "vqtrain/errors.hpp"

namespace vqtrain {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr uint64_t kTestEvalTag = 0xFFFFFFFFULL;

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ordered_json config_to_json(const ExperimentConfig& config) {
  ordered_json j;
  j["label"] = config.label;
  j["num_nodes"] = config.num_nodes;
  j["layers"] = config.layers;
  j["noise_mode"] = config.noise_mode == NoiseMode::kNone      ? "none"
                    : config.noise_mode == NoiseMode::kPerGate ? "per-gate"
                                                               : "merged";
  switch (config.noise.kind) {
    case NoiseSource::Kind::kGaussian:
      j["noise"] = {{"kind", "gaussian"}, {"mu", config.noise.mu}};
      break;
    case NoiseSource::Kind::kFixed:
      j["noise"] = {{"kind", "fixed"},
                    {"instance", ordered_json::parse(config.noise.fixed.to_json_string())}};
      break;
    case NoiseSource::Kind::kDifferTargeted:
      j["noise"] = {{"kind", "differ-targeted"},
                    {"target", config.noise.differ_target},
                    {"mean", config.noise.differ_mean}};
      break;
  }
  j["shots"] = config.shots;
  j["batch_size"] = config.batch_size;
  j["lambda"] = config.lambda;
  j["accuracy_threshold"] = config.accuracy_threshold;
  j["strict_threshold"] = config.strict_threshold;
  j["alternate"] = config.alternate;
  if (config.compression_threshold.has_value()) {
    j["compression_threshold"] = *config.compression_threshold;
  } else {
    j["compression_threshold"] = nullptr;
  }
  j["repetitions"] = config.repetitions;
  j["max_iterations"] = config.max_iterations;
  j["normalize_features"] = config.normalize_features;
  j["resample_split"] = config.resample_split;
  j["seed"] = config.seed;
  return j;
}

ExperimentConfig config_from_json(const ordered_json& j) {
  ExperimentConfig config;
  config.label = j.value("label", std::string{});
  config.num_nodes = j.value("num_nodes", 1);
  config.layers = j.value("layers", 4);
  const std::string mode = j.value("noise_mode", std::string("per-gate"));
  config.noise_mode = mode == "none"    ? NoiseMode::kNone
                      : mode == "merged" ? NoiseMode::kMerged
                                         : NoiseMode::kPerGate;
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    const std::string kind = n.value("kind", std::string("gaussian"));
    if (kind == "gaussian") {
      config.noise.kind = NoiseSource::Kind::kGaussian;
      config.noise.mu = n.value("mu", 0.016);
    } else if (kind == "fixed") {
      config.noise.kind = NoiseSource::Kind::kFixed;
      config.noise.fixed = NoiseInstance::from_json_string(n.at("instance").dump());
    } else {
      config.noise.kind = NoiseSource::Kind::kDifferTargeted;
      config.noise.differ_target = n.value("target", 0.0);
      config.noise.differ_mean = n.value("mean", 0.04);
    }
  }
  config.shots = j.value("shots", 8192L);
  config.batch_size = j.value("batch_size", 5);
  config.lambda = j.value("lambda", 0.0);
  config.accuracy_threshold = j.value("accuracy_threshold", 0.96);
  config.strict_threshold = j.value("strict_threshold", false);
  config.alternate = j.value("alternate", false);
  if (j.contains("compression_threshold") && !j.at("compression_threshold").is_null()) {
    config.compression_threshold = j.at("compression_threshold").get<double>();
  }
  config.repetitions = j.value("repetitions", 20);
  config.max_iterations = j.value("max_iterations", 10000L);
  config.normalize_features = j.value("normalize_features", false);
  config.resample_split = j.value("resample_split", true);
  config.seed = j.value("seed", uint64_t{1});
  return config;
}

NoiseInstance instance_for_run(const ExperimentConfig& config, uint64_t run_seed) {
  switch (config.noise.kind) {
    case NoiseSource::Kind::kGaussian:
      return sample_gaussian_profiles(config.num_nodes, config.noise.mu, run_seed);
    case NoiseSource::Kind::kFixed:
      return config.noise.fixed;
    case NoiseSource::Kind::kDifferTargeted:
      // One instance per config, shared by all repetitions.
      return generate_profiles_for_differ(config.num_nodes, config.noise.differ_target,
                                          config.noise.differ_mean, config.seed);
  }
  throw ConfigError("unknown noise source");
}

TrainConfig to_train_config(const ExperimentConfig& config, const NoiseInstance& instance,
                            uint64_t run_seed) {
  TrainConfig tc;
  tc.layers = config.layers;
  tc.noise_mode = config.noise_mode;
  tc.profiles = instance.profiles;
  tc.shots = config.shots == 0 ? Shots::analytic() : Shots::sampled(config.shots);
  tc.batch_size = config.batch_size;
  tc.lambda = config.lambda;
  tc.max_iterations = config.max_iterations;
  tc.accuracy_threshold = config.accuracy_threshold;
  tc.strict_threshold = config.strict_threshold;
  tc.alternate = config.alternate;
  tc.compression_threshold = config.compression_threshold;
  tc.seed = run_seed;
  tc.exec = config.exec;
  return tc;
}

}  // namespace

std::string ExperimentConfig::to_json_string() const { return config_to_json(*this).dump(2); }

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  try {
    return config_from_json(ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment config JSON: ") + e.what());
  }
}

uint64_t ExperimentConfig::hash() const { return fnv1a(to_json_string()); }

int RunArtifact::converged_count() const {
  int count = 0;
  for (const auto& run : runs) count += run.converged ? 1 : 0;
  return count;
}

double RunArtifact::mean_iterations() const {
  if (runs.empty()) throw MetricError("artifact without runs");
  double total = 0.0;
  for (const auto& run : runs) total += static_cast<double>(run.iterations);
  return total / static_cast<double>(runs.size());
}

std::optional<double> RunArtifact::mean_converged_iterations() const {
  double total = 0.0;
  int count = 0;
  for (const auto& run : runs) {
    if (run.converged) {
      total += static_cast<double>(run.iterations);
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return total / count;
}

long RunArtifact::total_transmitted() const {
  long total = 0;
  for (const auto& run : runs) total += run.transmitted;
  return total;
}

long RunArtifact::total_circuits() const {
  long total = 0;
  for (const auto& run : runs) total += run.circuits;
  return total;
}

RunArtifact run_experiment(const ExperimentConfig& config, const Dataset& dataset) {
  if (config.repetitions < 1) throw ConfigError("need at least one repetition");
  RunArtifact artifact;
  artifact.config_json = config.to_json_string();
  artifact.config_hash = config.hash();
  artifact.runs.resize(config.repetitions);

  const bool parallel = config.exec == Exec::kParallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const uint64_t run_seed =
        derive_seed(config.seed, {stream::kRepetition, static_cast<uint64_t>(rep)});
    Dataset local = dataset;
    if (config.resample_split) local.resplit(run_seed);

    const NoiseInstance instance = instance_for_run(config, run_seed);
    const TrainConfig tc = to_train_config(config, instance, run_seed);
    const std::vector<Sample> train_set = local.train_samples(config.normalize_features);
    const TrainResult result = train(tc, train_set);

    RunRecord record;
    record.repetition = rep;
    record.run_seed = run_seed;
    record.converged = result.converged;
    record.iterations = result.iterations;
    record.circuits = result.ledger.circuit_executions;
    record.transmitted = result.ledger.transmitted_components;
    record.final_accuracy = result.final_accuracy;
    record.final_loss = result.final_loss;
    record.history = result.history;

    const Model model = make_classifier(2, config.layers, config.noise_mode);
    const int conv_node = pick_convergence_node(tc);
    const ConvergenceResult test_eval = convergence_test(
        model, result.theta, tc.profiles[conv_node], local.test_samples(config.normalize_features),
        config.accuracy_threshold, config.strict_threshold, tc.shots,
        derive_seed(run_seed, {stream::kConvergenceTest, kTestEvalTag}), config.exec);
    record.test_accuracy = test_eval.accuracy;

    artifact.runs[rep] = std::move(record);
  }
  return artifact;
}

double paired_speedup(const RunArtifact& single_node, const RunArtifact& multi_node, int d,
                      int num_nodes) {
  const size_t pairs = std::min(single_node.runs.size(), multi_node.runs.size());
  double iters_1 = 0.0, iters_m = 0.0;
  int converged_pairs = 0;
  for (size_t rep = 0; rep < pairs; ++rep) {
    if (single_node.runs[rep].converged && multi_node.runs[rep].converged) {
      iters_1 += static_cast<double>(single_node.runs[rep].iterations);
      iters_m += static_cast<double>(multi_node.runs[rep].iterations);
      ++converged_pairs;
    }
  }
  if (converged_pairs == 0) throw SpeedupUndefined("no repetition converged on both sides");
  const ConvergenceRecord one{iters_1 / converged_pairs, true};
  const ConvergenceRecord many{iters_m / converged_pairs, true};
  return measured_speedup(one, many, d, num_nodes);
}

void emit_history_csv(const RunArtifact& artifact, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(12);
  out << "run,iteration,loss,train_acc,grad_norm,transmitted_components,circuits\n";
  for (const auto& run : artifact.runs) {
    for (const auto& row : run.history) {
      out << run.repetition << ',' << row.iteration << ',' << row.loss << ','
          << row.train_accuracy << ',' << row.grad_norm << ',' << row.transmitted << ','
          << row.circuits << '\n';
    }
  }
}

void emit_summary_json(const RunArtifact& artifact, const std::string& path) {
  ordered_json j;
  j["schema_version"] = 1;
  j["config"] = ordered_json::parse(artifact.config_json);
  j["config_hash"] = artifact.config_hash;
  j["runs"] = ordered_json::array();
  for (const auto& run : artifact.runs) {
    j["runs"].push_back({{"repetition", run.repetition},
                         {"run_seed", run.run_seed},
                         {"converged", run.converged},
                         {"iterations", run.iterations},
                         {"circuits", run.circuits},
                         {"transmitted", run.transmitted},
                         {"final_accuracy", run.final_accuracy},
                         {"final_loss", run.final_loss},
                         {"test_accuracy", run.test_accuracy}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

RunArtifact load_summary_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("summary JSON: ") + e.what());
  }
  RunArtifact artifact;
  artifact.config_json = j.at("config").dump(2);
  artifact.config_hash = j.at("config_hash").get<uint64_t>();
  for (const auto& run_json : j.at("runs")) {
    RunRecord run;
    run.repetition = run_json.at("repetition").get<int>();
    run.run_seed = run_json.at("run_seed").get<uint64_t>();
    run.converged = run_json.at("converged").get<bool>();
    run.iterations = run_json.at("iterations").get<long>();
    run.circuits = run_json.at("circuits").get<long>();
    run.transmitted = run_json.at("transmitted").get<long>();
    run.final_accuracy = run_json.at("final_accuracy").get<double>();
    run.final_loss = run_json.at("final_loss").get<double>();
    run.test_accuracy = run_json.at("test_accuracy").get<double>();
    artifact.runs.push_back(std::move(run));
  }
  return artifact;
}

bool summary_equal(const RunArtifact& a, const RunArtifact& b) {
  if (a.config_hash != b.config_hash || a.runs.size() != b.runs.size()) return false;
  if (ordered_json::parse(a.config_json) != ordered_json::parse(b.config_json)) return false;
  for (size_t i = 0; i < a.runs.size(); ++i) {
    const RunRecord& x = a.runs[i];
    const RunRecord& y = b.runs[i];
    if (x.repetition != y.repetition || x.run_seed != y.run_seed ||
        x.converged != y.converged || x.iterations != y.iterations ||
        x.circuits != y.circuits || x.transmitted != y.transmitted ||
        x.final_accuracy != y.final_accuracy || x.final_loss != y.final_loss ||
        x.test_accuracy != y.test_accuracy) {
      return false;
    }
  }
  return true;
}

std::vector<NoiseSweepCell> sweep_noise(const ExperimentConfig& base,
                                        const std::vector<int>& node_counts,
                                        const std::vector<double>& mus, const Dataset& dataset) {
  std::vector<NoiseSweepCell> cells;
  for (int m : node_counts) {
    for (double mu : mus) {
      ExperimentConfig config = base;
      config.num_nodes = m;
      config.noise.kind = NoiseSource::Kind::kGaussian;
      config.noise.mu = mu;
      std::ostringstream label;
      label << "m=" << m << " mu=" << mu;
      config.label = label.str();
      cells.push_back({m, mu, run_experiment(config, dataset)});
    }
  }
  return cells;
}

void emit_noise_sweep_csv(const std::vector<NoiseSweepCell>& cells, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(12);
  out << "m,mu,repetitions,converged,mean_iterations,mean_converged_iterations,"
         "total_circuits,total_transmitted,speedup_vs_m1\n";
  for (const auto& cell : cells) {
    out << cell.num_nodes << ',' << cell.mu << ',' << cell.artifact.runs.size() << ','
        << cell.artifact.converged_count() << ',' << cell.artifact.mean_iterations() << ',';
    if (const auto mc = cell.artifact.mean_converged_iterations()) {
      out << *mc;
    }
    out << ',' << cell.artifact.total_circuits() << ',' << cell.artifact.total_transmitted()
        << ',';
    if (cell.num_nodes > 1) {
      // Pair with the single-node cell at the same noise level, if present.
      for (const auto& other : cells) {
        if (other.num_nodes == 1 && other.mu == cell.mu) {
          try {
            out << paired_speedup(other.artifact, cell.artifact, 8, cell.num_nodes);
          } catch (const SpeedupUndefined&) {
          }
          break;
        }
      }
    }
    out << '\n';
  }
}

DifferSweep sweep_differ(const ExperimentConfig& base, const std::vector<double>& differs,
                         int instances, const Dataset& dataset) {
  DifferSweep sweep;

  ExperimentConfig baseline = base;
  baseline.num_nodes = 1;
  baseline.alternate = false;
  baseline.noise.kind = NoiseSource::Kind::kFixed;
  baseline.noise.fixed.mode = NoiseGenMode::kGaussian;
  baseline.noise.fixed.mu = base.noise.differ_mean;
  baseline.noise.fixed.profiles = {NoiseProfile::from_p1(0, base.noise.differ_mean)};
  baseline.label = "baseline m=1";
  sweep.baseline = run_experiment(baseline, dataset);

  for (size_t di = 0; di < differs.size(); ++di) {
    for (int inst = 0; inst < instances; ++inst) {
      const uint64_t instance_seed = derive_seed(
          base.seed, {stream::kNoiseGen, static_cast<uint64_t>(di), static_cast<uint64_t>(inst)});
      const NoiseInstance noise = generate_profiles_for_differ(
          base.num_nodes, differs[di], base.noise.differ_mean, instance_seed);
      for (bool alternate : {false, true}) {
        ExperimentConfig config = base;
        config.alternate = alternate;
        config.noise.kind = NoiseSource::Kind::kFixed;
        config.noise.fixed = noise;
        std::ostringstream label;
        label << "differ=" << differs[di] << " inst=" << inst
              << (alternate ? " alternate" : " plain");
        config.label = label.str();
        sweep.cells.push_back(
            {differs[di], inst, alternate, noise, run_experiment(config, dataset)});
      }
    }
  }
  return sweep;
}

void emit_differ_sweep_csv(const DifferSweep& sweep, int d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(12);
  out << "differ,instance,alternate,repetitions,converged,mean_iterations,speedup_vs_m1\n";
  for (const auto& cell : sweep.cells) {
    out << cell.differ << ',' << cell.instance << ',' << (cell.alternate ? 1 : 0) << ','
        << cell.artifact.runs.size() << ',' << cell.artifact.converged_count() << ','
        << cell.artifact.mean_iterations() << ',';
    try {
      out << paired_speedup(sweep.baseline, cell.artifact, d,
                            static_cast<int>(cell.noise.profiles.size()));
    } catch (const SpeedupUndefined&) {
    }
    out << '\n';
  }
}

std::vector<ThresholdSweepCell> sweep_threshold(const ExperimentConfig& base,
                                                const std::vector<double>& thresholds,
                                                const Dataset& dataset) {
  std::vector<ThresholdSweepCell> cells;
  ExperimentConfig uncompressed = base;
  uncompressed.compression_threshold.reset();
  uncompressed.label = "uncompressed";
  cells.push_back({-1.0, run_experiment(uncompressed, dataset)});
  for (double thr : thresholds) {
    ExperimentConfig config = base;
    config.compression_threshold = thr;
    std::ostringstream label;
    label << "thr=" << thr;
    config.label = label.str();
    cells.push_back({thr, run_experiment(config, dataset)});
  }
  return cells;
}

void emit_threshold_sweep_csv(const std::vector<ThresholdSweepCell>& cells,
                              const RunArtifact& single_node_baseline, int d,
                              const std::string& path) {
  const ThresholdSweepCell* uncompressed = nullptr;
  for (const auto& cell : cells) {
    if (cell.threshold < 0.0) uncompressed = &cell;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(12);
  out << "thr,repetitions,converged,mean_iterations,total_transmitted,"
         "compression_ratio,speedup_vs_m1\n";
  for (const auto& cell : cells) {
    out << cell.threshold << ',' << cell.artifact.runs.size() << ','
        << cell.artifact.converged_count() << ',' << cell.artifact.mean_iterations() << ','
        << cell.artifact.total_transmitted() << ',';
    if (uncompressed != nullptr && cell.threshold >= 0.0) {
      out << compression_ratio(cell.artifact.total_transmitted(),
                               uncompressed->artifact.total_transmitted());
    }
    out << ',';
    int num_nodes = 1;
    {
      const ExperimentConfig config = ExperimentConfig::from_json_string(cell.artifact.config_json);
      num_nodes = config.num_nodes;
    }
    try {
      out << paired_speedup(single_node_baseline, cell.artifact, d, num_nodes);
    } catch (const SpeedupUndefined&) {
    }
    out << '\n';
  }
}

TheoryPoint run_theory_point(const Dataset& dataset, int num_nodes, double p_max, long iterations,
                             long shots, int runs, uint64_t seed, Exec exec) {
  if (p_max < 0.0 || p_max >= 1.0) throw ConfigError("merged probability must be in [0, 1)");
  const int layers = 4;
  const Model clean_model = make_classifier(2, layers, NoiseMode::kNone);
  const int d = clean_model.circuit.param_count();

  // Heterogeneous merged probabilities with the maximum pinned at p_max.
  std::vector<NoiseProfile> profiles;
  for (int i = 0; i < num_nodes; ++i) {
    const double target = p_max * static_cast<double>(i + 1) / static_cast<double>(num_nodes);
    const double p1 = 1.0 - std::pow(1.0 - target, 1.0 / static_cast<double>(layers));
    profiles.push_back(NoiseProfile::from_p1(i, p1));
  }

  std::vector<std::vector<double>> final_gradients(runs);
  const bool parallel = exec == Exec::kParallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int r = 0; r < runs; ++r) {
    const uint64_t run_seed = derive_seed(seed, {stream::kRepetition, static_cast<uint64_t>(r)});
    Dataset local = dataset;
    local.resplit(run_seed);
    const std::vector<Sample> train_set = local.train_samples(false);

    TrainConfig tc;
    tc.layers = layers;
    tc.noise_mode = NoiseMode::kMerged;
    tc.profiles = profiles;
    tc.shots = shots == 0 ? Shots::analytic() : Shots::sampled(shots);
    tc.batch_size = static_cast<int>(train_set.size());  // full batch
    tc.lambda = 0.0;
    tc.max_iterations = iterations;
    tc.run_convergence_test = false;
    tc.optimizer = OptimizerKind::kPlainSgd;
    tc.sgd_eta = 1.0 / smoothness_constant(d, 0.0);
    tc.seed = run_seed;
    tc.exec = exec;
    const TrainResult result = train(tc, train_set);

    final_gradients[r] = parameter_shift_gradient(clean_model, train_set, result.theta, {0, d},
                                                  NoiseProfile::noiseless(), Shots::analytic(),
                                                  0.0, 0, exec)
                             .values;
  }

  TheoryPoint point;
  point.params.d = d;
  point.params.lambda = 0.0;
  point.params.shots = shots;
  point.params.dataset_size = 75;
  point.params.iterations = iterations;
  point.params.p_max = p_max;
  point.observed_r1 = r1_metric(final_gradients);
  point.bound = r1_upper_bound(point.params);
  point.runs = runs;
  return point;
}

void emit_theory_csv(const std::vector<TheoryPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(12);
  out << "p_max,iterations,shots,runs,observed_r1,upper_bound,holds\n";
  for (const auto& point : points) {
    out << point.params.p_max << ',' << point.params.iterations << ',' << point.params.shots
        << ',' << point.runs << ',' << point.observed_r1 << ',' << point.bound << ','
        << (point.observed_r1 <= point.bound ? 1 : 0) << '\n';
  }
}

}  // namespace vqtrain

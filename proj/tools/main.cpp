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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vqtrain/errors.hpp"
#include "vqtrain/harness.hpp"

using namespace vqtrain;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNonConvergence = 2;

struct GlobalOptions {
  std::string iris_path;
  std::string out_dir = "out";
  std::string config_file;
  bool serial = false;
  bool full = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ExperimentConfig load_base_config(const GlobalOptions& global) {
  ExperimentConfig config;
  if (!global.config_file.empty()) {
    config = ExperimentConfig::from_json_string(read_file(global.config_file));
  }
  if (global.serial) config.exec = Exec::kSerial;
  if (global.full) config.repetitions = 100;
  return config;
}

std::filesystem::path ensure_out_dir(const GlobalOptions& global) {
  std::filesystem::path dir(global.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void print_artifact_summary(const ExperimentConfig& config, const RunArtifact& artifact) {
  std::cout << "label: " << (config.label.empty() ? "(none)" : config.label) << "\n"
            << "repetitions: " << artifact.runs.size() << "\n"
            << "converged: " << artifact.converged_count() << "\n"
            << "mean iterations (capped): " << artifact.mean_iterations() << "\n";
  if (const auto mc = artifact.mean_converged_iterations()) {
    std::cout << "mean iterations (converged only): " << *mc << "\n";
  }
  std::cout << "total circuits: " << artifact.total_circuits() << "\n"
            << "total transmitted components: " << artifact.total_transmitted() << "\n";
  double test_acc = 0.0;
  for (const auto& run : artifact.runs) test_acc += run.test_accuracy;
  std::cout << "mean test accuracy: " << test_acc / static_cast<double>(artifact.runs.size())
            << "\n";
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> values;
  std::stringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) values.push_back(std::stod(token));
  return values;
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> values;
  std::stringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) values.push_back(std::stoi(token));
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed trainer for small variational quantum classifiers"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions global;
  app.add_option("--iris", global.iris_path,
                 "Iris CSV path (falls back to $IRIS_PATH, then data/iris.csv)");
  app.add_option("--out", global.out_dir, "output directory");
  app.add_option("--config", global.config_file, "experiment config JSON file");
  app.add_flag("--serial", global.serial, "disable the OpenMP execution path");
  app.add_flag("--full", global.full, "run the full 100-repetition protocol");

  // ---- train ---------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train once or repeatedly at one setting");
  int nodes = 1;
  int layers = 4;
  double mu = 0.016;
  std::string noise_file;
  long shots = 8192;
  int batch = 5;
  double lambda = 0.0;
  double thr = -1.0;
  bool alternate = false;
  int reps = 1;
  uint64_t seed = 1;
  long max_iters = 10000;
  bool normalize = false;
  std::string label;
  std::string noise_mode = "per-gate";
  train_cmd->add_option("--nodes", nodes, "number of local nodes M");
  train_cmd->add_option("--layers", layers, "ansatz layers (d = 2 * layers parameters)");
  auto* mu_opt = train_cmd->add_option("--mu", mu, "mean single-qubit depolarizing probability");
  train_cmd->add_option("--noise-file", noise_file, "fixed noise instance JSON");
  train_cmd->add_option("--shots", shots, "measurement shots per expectation (0 = analytic)");
  train_cmd->add_option("--batch", batch, "batch size");
  train_cmd->add_option("--lambda", lambda, "L2 regularizer coefficient");
  train_cmd->add_option("--thr", thr, "gradient compression threshold (omit to disable)");
  train_cmd->add_flag("--alternate", alternate, "cycle the group-to-node assignment");
  train_cmd->add_option("--reps", reps, "independent repetitions");
  train_cmd->add_option("--seed", seed, "master seed");
  train_cmd->add_option("--max-iters", max_iters, "iteration cap");
  train_cmd->add_flag("--normalize", normalize, "scale each feature by its dataset maximum");
  train_cmd->add_option("--label", label, "label recorded in outputs");
  train_cmd->add_option("--noise-mode", noise_mode, "per-gate, merged, or none");

  // ---- sweeps ---------------------------------------------------------------
  auto* sweep_noise_cmd =
      app.add_subcommand("sweep-noise", "grid of node counts and noise means");
  std::string ms_csv = "1,2,4,8";
  std::string mus_csv = "0,0.01,0.03,0.05";
  int sweep_reps = 20;
  uint64_t sweep_seed = 1;
  sweep_noise_cmd->add_option("--ms", ms_csv, "node counts, comma separated");
  sweep_noise_cmd->add_option("--mus", mus_csv, "noise means, comma separated");
  sweep_noise_cmd->add_option("--reps", sweep_reps, "repetitions per cell");
  sweep_noise_cmd->add_option("--seed", sweep_seed, "master seed");

  auto* sweep_differ_cmd =
      app.add_subcommand("sweep-differ", "noise-heterogeneity sweep, alternate off vs on");
  std::string differs_csv = "0,0.1,0.2,0.3,0.4,0.5,0.6";
  int differ_nodes = 4;
  int instances = 10;
  int differ_reps = 10;
  double differ_mean = 0.04;
  uint64_t differ_seed = 1;
  sweep_differ_cmd->add_option("--differs", differs_csv, "differ targets, comma separated");
  sweep_differ_cmd->add_option("--nodes", differ_nodes, "number of local nodes M");
  sweep_differ_cmd->add_option("--instances", instances, "noise instances per target");
  sweep_differ_cmd->add_option("--reps", differ_reps, "repetitions per instance");
  sweep_differ_cmd->add_option("--mean", differ_mean, "mean single-qubit probability");
  sweep_differ_cmd->add_option("--seed", differ_seed, "master seed");

  auto* sweep_thr_cmd =
      app.add_subcommand("sweep-threshold", "compression threshold sweep with baselines");
  std::string thrs_csv = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7";
  int thr_nodes = 4;
  double thr_mu = 0.016;
  int thr_reps = 20;
  uint64_t thr_seed = 1;
  sweep_thr_cmd->add_option("--thrs", thrs_csv, "thresholds, comma separated");
  sweep_thr_cmd->add_option("--nodes", thr_nodes, "number of local nodes M");
  sweep_thr_cmd->add_option("--mu", thr_mu, "mean single-qubit probability");
  sweep_thr_cmd->add_option("--reps", thr_reps, "repetitions per cell");
  sweep_thr_cmd->add_option("--seed", thr_seed, "master seed");

  // ---- report ----------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "tabulate emitted summary JSON files");
  std::vector<std::string> summary_paths;
  std::string baseline_path;
  std::string report_out;
  report_cmd->add_option("summaries", summary_paths, "summary JSON files")->required();
  report_cmd->add_option("--baseline", baseline_path,
                         "single-node summary for speed-up and compression columns");
  report_cmd->add_option("--csv", report_out, "write the table to this CSV instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string iris = resolve_iris_path(global.iris_path);

    if (*report_cmd) {
      std::optional<RunArtifact> baseline;
      if (!baseline_path.empty()) baseline = load_summary_json(baseline_path);
      std::ostringstream table;
      table << "label,nodes,repetitions,converged,mean_iterations,total_circuits,"
               "total_transmitted,speedup_vs_baseline,compression_ratio_vs_baseline\n";
      for (const auto& path : summary_paths) {
        const RunArtifact artifact = load_summary_json(path);
        const ExperimentConfig config =
            ExperimentConfig::from_json_string(artifact.config_json);
        table << (config.label.empty() ? path : config.label) << ',' << config.num_nodes << ','
              << artifact.runs.size() << ',' << artifact.converged_count() << ','
              << artifact.mean_iterations() << ',' << artifact.total_circuits() << ','
              << artifact.total_transmitted() << ',';
        if (baseline.has_value() && config.num_nodes >= 1) {
          try {
            table << paired_speedup(*baseline, artifact, 8, config.num_nodes);
          } catch (const SpeedupUndefined&) {
          }
        }
        table << ',';
        if (baseline.has_value()) {
          table << compression_ratio(artifact.total_transmitted(),
                                     baseline->total_transmitted());
        }
        table << '\n';
      }
      if (report_out.empty()) {
        std::cout << table.str();
      } else {
        std::ofstream out(report_out);
        if (!out) throw IoError("cannot write " + report_out);
        out << table.str();
      }
      return kExitOk;
    }

    const Dataset dataset = load_iris(iris, 1);
    const auto out_dir = ensure_out_dir(global);

    if (*train_cmd) {
      ExperimentConfig config = load_base_config(global);
      config.num_nodes = nodes;
      config.layers = layers;
      config.shots = shots;
      config.batch_size = batch;
      config.lambda = lambda;
      config.alternate = alternate;
      config.repetitions = global.full ? 100 : reps;
      config.seed = seed;
      config.max_iterations = max_iters;
      config.normalize_features = normalize;
      if (!label.empty()) config.label = label;
      config.noise_mode = noise_mode == "merged" ? NoiseMode::kMerged
                          : noise_mode == "none" ? NoiseMode::kNone
                                                 : NoiseMode::kPerGate;
      if (thr >= 0.0) config.compression_threshold = thr;
      if (!noise_file.empty()) {
        config.noise.kind = NoiseSource::Kind::kFixed;
        config.noise.fixed = NoiseInstance::from_json_string(read_file(noise_file));
      } else if (mu_opt->count() > 0 || config.label.empty()) {
        config.noise.kind = NoiseSource::Kind::kGaussian;
        config.noise.mu = mu;
      }
      if (global.serial) config.exec = Exec::kSerial;

      const RunArtifact artifact = run_experiment(config, dataset);
      emit_history_csv(artifact, (out_dir / "history.csv").string());
      emit_summary_json(artifact, (out_dir / "summary.json").string());
      print_artifact_summary(config, artifact);
      std::cout << "wrote " << (out_dir / "history.csv").string() << " and "
                << (out_dir / "summary.json").string() << "\n";
      return artifact.converged_count() == static_cast<int>(artifact.runs.size())
                 ? kExitOk
                 : kExitNonConvergence;
    }

    if (*sweep_noise_cmd) {
      ExperimentConfig base = load_base_config(global);
      base.repetitions = global.full ? 100 : sweep_reps;
      base.seed = sweep_seed;
      const auto cells = sweep_noise(base, parse_ints(ms_csv), parse_doubles(mus_csv), dataset);
      emit_noise_sweep_csv(cells, (out_dir / "noise_sweep.csv").string());
      for (const auto& cell : cells) {
        std::ostringstream name;
        name << "noise_m" << cell.num_nodes << "_mu" << cell.mu << ".summary.json";
        emit_summary_json(cell.artifact, (out_dir / name.str()).string());
      }
      std::cout << "wrote " << (out_dir / "noise_sweep.csv").string() << "\n";
      return kExitOk;
    }

    if (*sweep_differ_cmd) {
      ExperimentConfig base = load_base_config(global);
      base.num_nodes = differ_nodes;
      base.repetitions = global.full ? 50 : differ_reps;
      base.seed = differ_seed;
      base.noise.kind = NoiseSource::Kind::kDifferTargeted;
      base.noise.differ_mean = differ_mean;
      const DifferSweep sweep = sweep_differ(base, parse_doubles(differs_csv), instances, dataset);
      emit_differ_sweep_csv(sweep, 8, (out_dir / "differ_sweep.csv").string());
      emit_summary_json(sweep.baseline, (out_dir / "differ_baseline.summary.json").string());
      // The generated noise settings, for rerunning any cell via --noise-file.
      {
        std::ofstream instances_out(out_dir / "differ_instances.jsonl");
        for (const auto& cell : sweep.cells) {
          if (!cell.alternate) instances_out << cell.noise.to_json_string() << "\n";
        }
      }
      std::cout << "wrote " << (out_dir / "differ_sweep.csv").string() << "\n";
      return kExitOk;
    }

    if (*sweep_thr_cmd) {
      ExperimentConfig base = load_base_config(global);
      base.num_nodes = thr_nodes;
      base.repetitions = global.full ? 100 : thr_reps;
      base.seed = thr_seed;
      base.noise.kind = NoiseSource::Kind::kGaussian;
      base.noise.mu = thr_mu;

      ExperimentConfig single = base;
      single.num_nodes = 1;
      single.label = "m=1 baseline";
      const RunArtifact single_node = run_experiment(single, dataset);

      const auto cells = sweep_threshold(base, parse_doubles(thrs_csv), dataset);
      emit_threshold_sweep_csv(cells, single_node, 8,
                               (out_dir / "threshold_sweep.csv").string());
      emit_summary_json(single_node, (out_dir / "threshold_m1.summary.json").string());
      std::cout << "wrote " << (out_dir / "threshold_sweep.csv").string() << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}

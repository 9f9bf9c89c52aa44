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

// Wall-clock comparison of the serial reference kernels against the OpenMP
// ones, plus a cross-check that the two produce identical numbers.

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vqtrain/dataset.hpp"
#include "vqtrain/gradient.hpp"
#include "vqtrain/harness.hpp"

using namespace vqtrain;
using Clock = std::chrono::steady_clock;

namespace {

double time_seconds(const std::function<void()>& body) {
  const auto start = Clock::now();
  body();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both rows below run serially\n");
#endif

  const Dataset dataset = load_iris(resolve_iris_path(""), 1);
  const std::vector<Sample> train_set = dataset.train_samples();
  const Model model = make_classifier();
  Rng rng(2024);
  const ParameterVector params = ParameterVector::random(8, rng);
  const NoiseProfile profile = NoiseProfile::from_p1(0, 0.016);

  // Kernel 1: full parameter-shift gradient over the whole training set.
  {
    const int repeats = 40;
    GradientVector serial_grad, parallel_grad;
    const double serial_s = time_seconds([&] {
      for (int r = 0; r < repeats; ++r) {
        serial_grad = parameter_shift_gradient(model, train_set, params, {0, 8}, profile,
                                               Shots::sampled(8192), 0.0, 42, Exec::kSerial);
      }
    });
    const double parallel_s = time_seconds([&] {
      for (int r = 0; r < repeats; ++r) {
        parallel_grad = parameter_shift_gradient(model, train_set, params, {0, 8}, profile,
                                                 Shots::sampled(8192), 0.0, 42, Exec::kParallel);
      }
    });
    std::printf("\nparameter-shift gradient, 75 examples x 17 circuits, %d calls\n", repeats);
    std::printf("  serial   : %8.3f ms/call\n", 1e3 * serial_s / repeats);
    std::printf("  openmp   : %8.3f ms/call  (speedup %.2fx)\n", 1e3 * parallel_s / repeats,
                serial_s / parallel_s);
    std::printf("  identical: %s\n",
                serial_grad.values == parallel_grad.values ? "yes" : "NO (bug)");
  }

  // Kernel 2: a batch of independent training repetitions.
  {
    ExperimentConfig config;
    config.label = "bench";
    config.num_nodes = 4;
    config.noise.kind = NoiseSource::Kind::kGaussian;
    config.noise.mu = 0.016;
    config.shots = 8192;
    config.repetitions = 8;
    config.max_iterations = 60;
    config.seed = 11;

    config.exec = Exec::kSerial;
    RunArtifact serial_artifact;
    const double serial_s = time_seconds([&] { serial_artifact = run_experiment(config, dataset); });
    config.exec = Exec::kParallel;
    RunArtifact parallel_artifact;
    const double parallel_s =
        time_seconds([&] { parallel_artifact = run_experiment(config, dataset); });

    std::printf("\nexperiment harness, 8 repetitions x 60 iterations, M = 4\n");
    std::printf("  serial   : %8.3f s\n", serial_s);
    std::printf("  openmp   : %8.3f s  (speedup %.2fx)\n", parallel_s, serial_s / parallel_s);
    std::printf("  identical: %s\n",
                summary_equal(serial_artifact, parallel_artifact) ? "yes" : "NO (bug)");
  }
  return 0;
}

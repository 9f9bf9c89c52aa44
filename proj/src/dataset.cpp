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

#include "vqtrain/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "vqtrain/errors.hpp"
#include "vqtrain/rng.hpp"

namespace vqtrain {

namespace {

constexpr size_t kExpectedPerClass = 50;
constexpr size_t kTrainCount = 75;

std::vector<Sample> gather(const Dataset& dataset, const std::vector<size_t>& indices,
                           bool normalize) {
  std::array<double, 4> scale{1.0, 1.0, 1.0, 1.0};
  if (normalize) {
    // Scale each attribute by its maximum so all four contribute comparable
    // amplitude weight. Signs are preserved: the parity readout is quadratic
    // in the amplitudes, so mean-centering would alias the two classes.
    scale.fill(0.0);
    for (const auto& example : dataset.examples) {
      for (size_t a = 0; a < 4; ++a) scale[a] = std::max(scale[a], std::abs(example.features[a]));
    }
    for (double& s : scale) {
      if (s == 0.0) s = 1.0;
    }
  }
  std::vector<Sample> samples;
  samples.reserve(indices.size());
  for (size_t idx : indices) {
    const Example& example = dataset.examples[idx];
    Sample sample;
    sample.features = {example.features[0] / scale[0], example.features[1] / scale[1],
                       example.features[2] / scale[2], example.features[3] / scale[3]};
    sample.label = static_cast<double>(example.label);
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace

void Dataset::resplit(uint64_t seed) {
  split_seed = seed;
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(derive_seed(seed, {stream::kSplit}));
  rng.shuffle(order);
  train_indices.assign(order.begin(), order.begin() + kTrainCount);
  test_indices.assign(order.begin() + kTrainCount, order.end());
}

std::vector<Sample> Dataset::train_samples(bool normalize_features) const {
  return gather(*this, train_indices, normalize_features);
}

std::vector<Sample> Dataset::test_samples(bool normalize_features) const {
  return gather(*this, test_indices, normalize_features);
}

Dataset load_iris(const std::string& path, uint64_t split_seed) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open dataset file: " + path);

  Dataset dataset;
  std::string line;
  size_t line_number = 0;
  size_t versicolor = 0, virginica = 0;
  while (std::getline(file, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line_number == 1 && line.find("sepal") != std::string::npos) continue;  // header

    std::stringstream row(line);
    std::string field;
    std::array<double, 4> features{};
    for (size_t a = 0; a < 4; ++a) {
      if (!std::getline(row, field, ',')) {
        throw ParseError("line " + std::to_string(line_number) + ": missing attribute column");
      }
      try {
        size_t parsed = 0;
        features[a] = std::stod(field, &parsed);
        if (parsed != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_number) + ": bad numeric value '" +
                         field + "'");
      }
    }
    if (!std::getline(row, field)) {
      throw ParseError("line " + std::to_string(line_number) + ": missing species column");
    }
    if (field.find("versicolor") != std::string::npos) {
      dataset.examples.push_back({features, 0});
      ++versicolor;
    } else if (field.find("virginica") != std::string::npos) {
      dataset.examples.push_back({features, 1});
      ++virginica;
    }
    // other species (setosa) are skipped
  }
  if (versicolor != kExpectedPerClass || virginica != kExpectedPerClass) {
    throw DataError("expected 50 versicolor and 50 virginica rows, got " +
                    std::to_string(versicolor) + " and " + std::to_string(virginica));
  }
  dataset.resplit(split_seed);
  return dataset;
}

std::string resolve_iris_path(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv("IRIS_PATH"); env != nullptr && *env != '\0') {
    return env;
  }
  return "data/iris.csv";
}

}  // namespace vqtrain

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

#ifndef VQTRAIN_DATASET_HPP_
#define VQTRAIN_DATASET_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vqtrain/model.hpp"

namespace vqtrain {

// One Iris flower reduced to the binary task: versicolor = 0, virginica = 1.
struct Example {
  std::array<double, 4> features{};
  int label = 0;
};

// The 100-example binary subset with a seeded 75/25 train/test split.
struct Dataset {
  std::vector<Example> examples;
  std::vector<size_t> train_indices;
  std::vector<size_t> test_indices;
  uint64_t split_seed = 0;

  // Redraws the split; same seed, same split.
  void resplit(uint64_t seed);

  // Feature vectors ready for amplitude encoding. With normalize_features
  // each attribute is scaled by its maximum over the 100 examples first.
  std::vector<Sample> train_samples(bool normalize_features = false) const;
  std::vector<Sample> test_samples(bool normalize_features = false) const;
};

// Parses an Iris CSV (4 numeric columns + species), keeps the 50 versicolor
// and 50 virginica rows, and splits 75/25 with the given seed. Raises
// ParseError with the offending line number on malformed rows and DataError
// when the class counts are off.
Dataset load_iris(const std::string& path, uint64_t split_seed);

// Resolves the dataset location: explicit path if nonempty, else the
// IRIS_PATH environment variable, else "data/iris.csv".
std::string resolve_iris_path(const std::string& explicit_path);

}  // namespace vqtrain

#endif  // VQTRAIN_DATASET_HPP_

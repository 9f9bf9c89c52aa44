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

#include "vqtrain/compression.hpp"

#include <cmath>

#include "vqtrain/errors.hpp"

namespace vqtrain {

ClipResult clip_and_mask(std::span<const double> accumulated, double threshold) {
  if (threshold < 0.0) throw SpecError("clipping threshold must be nonnegative");
  ClipResult result;
  result.transmit.assign(accumulated.size(), 0.0);
  result.keep.assign(accumulated.size(), 0.0);
  result.mask.assign(accumulated.size(), 0);
  for (size_t j = 0; j < accumulated.size(); ++j) {
    if (std::abs(accumulated[j]) > threshold) {
      result.transmit[j] = accumulated[j];
      result.mask[j] = 1;
    } else {
      result.keep[j] = accumulated[j];
    }
  }
  return result;
}

ResidualStore ResidualStore::zeros(std::span<const int> group_sizes) {
  ResidualStore store;
  store.by_group.reserve(group_sizes.size());
  for (int size : group_sizes) {
    store.by_group.emplace_back(static_cast<size_t>(size), 0.0);
  }
  return store;
}

double compression_ratio(long cv_with, long cv_without) {
  if (cv_without <= 0) throw LedgerError("uncompressed communication volume must be positive");
  return 1.0 - static_cast<double>(cv_with) / static_cast<double>(cv_without);
}

double compression_ratio(const CommLedger& with, const CommLedger& without) {
  return compression_ratio(with.transmitted_components, without.transmitted_components);
}

}  // namespace vqtrain

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

#ifndef VQTRAIN_COMPRESSION_HPP_
#define VQTRAIN_COMPRESSION_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace vqtrain {

// Splits an accumulated gradient into the part worth sending and the part
// kept locally for later. transmit + keep == accumulated exactly and the two
// never overlap; a component is sent iff its magnitude strictly exceeds thr.
struct ClipResult {
  std::vector<double> transmit;
  std::vector<double> keep;
  std::vector<uint8_t> mask;  // 1 where transmitted
};

ClipResult clip_and_mask(std::span<const double> accumulated, double threshold);

// Residual gradients not yet transmitted, one vector per parameter group.
// They travel with the group: when a cyclic reassignment hands a group to a
// different node the residual information moves along with it.
struct ResidualStore {
  std::vector<std::vector<double>> by_group;

  static ResidualStore zeros(std::span<const int> group_sizes);
};

struct LedgerRow {
  long iteration = 0;
  long transmitted = 0;
  long circuits = 0;
};

// Running communication and circuit-execution totals for one training run.
// For uncompressed runs transmitted grows by d per iteration, so the ledger
// of a run without clipping reproduces iterations * d.
struct CommLedger {
  long transmitted_components = 0;
  long circuit_executions = 0;
  std::vector<LedgerRow> per_iteration;

  // Book-keeping for the conservation check: componentwise totals of every
  // raw gradient computed and of everything actually sent.
  std::vector<double> raw_sum;
  std::vector<double> transmitted_sum;

  void start_iteration(long iteration) { per_iteration.push_back({iteration, 0, 0}); }
  void add_transmission(long components) {
    transmitted_components += components;
    per_iteration.back().transmitted += components;
  }
  void add_circuits(long circuits) {
    circuit_executions += circuits;
    per_iteration.back().circuits += circuits;
  }
};

// 1 - CV_with / CV_without.
double compression_ratio(long cv_with, long cv_without);
double compression_ratio(const CommLedger& with, const CommLedger& without);

}  // namespace vqtrain

#endif  // VQTRAIN_COMPRESSION_HPP_

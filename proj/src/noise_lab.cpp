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

#include "vqtrain/noise_lab.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "vqtrain/errors.hpp"
#include "vqtrain/rng.hpp"

namespace vqtrain {

namespace {

// Margin below ln(M) beyond which we refuse to chase a target: the bisection
// ray would need a nearly-degenerate direction.
constexpr double kFeasibilityMargin = 1e-3;

double kl_from_uniform(std::span<const double> weights) {
  const int m = static_cast<int>(weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw MetricError("noise probabilities must be nonnegative");
    total += w;
  }
  if (total <= 0.0) throw MetricError("differ metric of an all-zero noise setting");
  double kl = 0.0;
  for (double w : weights) {
    const double p = w / total;
    if (p > 0.0) kl += p * std::log(p * static_cast<double>(m));
  }
  // Gibbs: tiny negatives are round-off only.
  return std::max(kl, 0.0);
}

}  // namespace

std::vector<double> NoiseInstance::p1_values() const {
  std::vector<double> values;
  values.reserve(profiles.size());
  for (const auto& profile : profiles) values.push_back(profile.p1);
  return values;
}

std::string NoiseInstance::to_json_string() const {
  nlohmann::ordered_json j;
  j["mu"] = mu;
  j["mode"] = mode == NoiseGenMode::kGaussian ? "gaussian" : "differ-targeted";
  j["profiles"] = nlohmann::ordered_json::array();
  for (const auto& profile : profiles) {
    j["profiles"].push_back({{"node_id", profile.node_id}, {"p1", profile.p1}, {"p2", profile.p2}});
  }
  return j.dump();
}

NoiseInstance NoiseInstance::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("noise instance JSON: ") + e.what());
  }
  NoiseInstance instance;
  instance.mu = j.at("mu").get<double>();
  instance.mode = j.at("mode").get<std::string>() == "gaussian" ? NoiseGenMode::kGaussian
                                                                : NoiseGenMode::kDifferTargeted;
  for (const auto& entry : j.at("profiles")) {
    NoiseProfile profile{entry.at("node_id").get<int>(), entry.at("p1").get<double>(),
                         entry.at("p2").get<double>()};
    profile.validate();
    instance.profiles.push_back(profile);
  }
  if (instance.profiles.empty()) throw ParseError("noise instance without profiles");
  return instance;
}

NoiseInstance sample_gaussian_profiles(int num_nodes, double mu, uint64_t seed) {
  if (num_nodes < 1) throw ConfigError("need at least one node");
  if (mu < 0.0 || mu > 0.25) throw NoiseError("mean single-qubit probability outside [0, 0.25]");
  NoiseInstance instance;
  instance.mu = mu;
  instance.mode = NoiseGenMode::kGaussian;
  Rng rng(derive_seed(seed, {stream::kNoiseGen}));
  for (int i = 0; i < num_nodes; ++i) {
    const double draw = mu == 0.0 ? 0.0 : rng.normal(mu, mu / 9.0);
    const double p1 = std::clamp(draw, 0.0, 1.0);
    instance.profiles.push_back(NoiseProfile::from_p1(i, p1));
  }
  return instance;
}

double differ_metric(std::span<const double> p1_values) { return kl_from_uniform(p1_values); }

double differ_metric(const NoiseInstance& instance) {
  const std::vector<double> values = instance.p1_values();
  return differ_metric(values);
}

NoiseInstance generate_profiles_for_differ(int num_nodes, double target_differ, double mean,
                                           uint64_t seed) {
  if (num_nodes < 2) throw ConfigError("differ-targeted generation needs at least two nodes");
  if (mean <= 0.0 || mean > 0.25) throw NoiseError("mean probability outside (0, 0.25]");
  if (target_differ < 0.0) throw InfeasibleTarget("differ target must be nonnegative");
  const double max_differ = std::log(static_cast<double>(num_nodes));
  if (target_differ > max_differ - kFeasibilityMargin) {
    throw InfeasibleTarget("differ target too close to ln(M)");
  }

  const double uniform_weight = 1.0 / static_cast<double>(num_nodes);
  std::vector<double> direction(num_nodes);
  if (target_differ == 0.0) {
    direction.assign(num_nodes, uniform_weight);
  } else {
    // Random point on the simplex via normalized exponentials.
    Rng rng(derive_seed(seed, {stream::kNoiseGen}));
    double total = 0.0;
    for (double& w : direction) {
      w = -std::log(1.0 - rng.uniform());
      total += w;
    }
    for (double& w : direction) w /= total;
    // Sharpen toward the largest coordinate until the ray can reach the
    // target at all.
    const size_t peak = static_cast<size_t>(
        std::max_element(direction.begin(), direction.end()) - direction.begin());
    for (int round = 0; round < 200 && kl_from_uniform(direction) < target_differ + 0.01;
         ++round) {
      for (double& w : direction) w *= 0.5;
      direction[peak] += 0.5;
    }
    if (kl_from_uniform(direction) < target_differ) {
      throw InfeasibleTarget("could not concentrate the direction enough");
    }
  }

  std::vector<double> weights(num_nodes);
  const auto mix_at = [&](double s) {
    for (int i = 0; i < num_nodes; ++i) {
      weights[i] = (1.0 - s) * uniform_weight + s * direction[i];
    }
    return kl_from_uniform(weights);
  };

  // KL along the ray grows from 0 at the uniform end, so bisection applies.
  double lo = 0.0, hi = 1.0;
  double kl_prev = 0.0;
  for (double s = 0.0; s <= 1.0; s += 0.125) {
    const double kl = mix_at(s);
    if (kl + 1e-12 < kl_prev) throw MetricError("KL not monotone along the simplex ray");
    kl_prev = kl;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mix_at(mid) < target_differ) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  mix_at(hi);

  // Scale so the mean lands on `mean` exactly; KL is scale invariant.
  double total = 0.0;
  for (double w : weights) total += w;
  const double scale = mean * static_cast<double>(num_nodes) / total;
  NoiseInstance instance;
  instance.mu = mean;
  instance.mode = NoiseGenMode::kDifferTargeted;
  for (int i = 0; i < num_nodes; ++i) {
    instance.profiles.push_back(NoiseProfile::from_p1(i, weights[i] * scale));
  }
  return instance;
}

}  // namespace vqtrain

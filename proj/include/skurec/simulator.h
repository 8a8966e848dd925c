// Copyright 2026 The skurec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SKUREC_SIMULATOR_H_
#define SKUREC_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "skurec/personalizer.h"

namespace skurec {

// How the stage-2 error enters the preferred capacity. Multiplicative:
// c_bar* = eps * c*. Additive: c_bar* = c* + eps. In both, log2(eps) is
// normal with deviation sigma.
enum class EpsilonMode { kMultiplicative, kAdditive };

struct SimConfig {
  std::vector<std::pair<std::string, double>> customers = {
      {"Alice", 0.0}, {"Bob", 1.5}, {"Charlie", -1.5}};
  std::vector<std::pair<std::string, double>> subscriptions = {
      {"Dev", -1.0}, {"Prod1", 0.5}, {"Prod2", 1.5}};
  std::size_t groups_per_subscription = 3;
  std::size_t min_resources = 1;
  std::size_t max_resources = 5;
  std::vector<double> candidates = {1, 2, 4, 8, 16, 32, 64, 128};
  std::vector<std::string> stratifications = {"GeneralPurpose"};
  double sigma = 0.1;
  double signal_rate = 0.4;
  double signal_noise = 0.13;
  std::size_t iterations = 50;
  PropagationConfig propagation;
  EpsilonMode epsilon_mode = EpsilonMode::kMultiplicative;
  double log_base = 2.0;
  std::uint64_t seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static SimConfig FromJson(const nlohmann::json& j);
};

struct SimResource {
  std::size_t customer = 0;
  std::size_t subscription = 0;
  std::string resource_group;
  std::string stratification;
  double lambda_true = 0.0;
  double c_star = 0.0;       // stage-2 recommendation
  double epsilon = 1.0;
  double c_bar_star = 0.0;   // optimum before personalization
  double c_bar_2star = 0.0;  // preferred capacity, on the candidate grid
};

struct SimMetrics {
  std::size_t iteration = 0;
  double rmse = 0.0;
  double p80_error = 0.0;
  std::size_t n_signals = 0;
};

// One (customer, subscription, resource group) profile and the
// stratifications its resources use.
struct SimProfile {
  std::size_t customer = 0;
  std::size_t subscription = 0;
  std::string resource_group;
  std::vector<std::string> stratifications;
  double lambda_true = 0.0;
};

struct SimState {
  std::vector<SimResource> resources;
  std::vector<SimProfile> profiles;
  LambdaStore estimates;
  // Entry 0 describes the initial state.
  std::vector<SimMetrics> history;
  std::mt19937_64 rng;
};

SimState InitSim(const SimConfig& config);

// Per-profile |lambda_true - lambda_hat|, averaged over the profile's
// stratifications.
std::vector<double> ProfileErrors(const SimState& state, const SimConfig& config);

// Current personalized recommendation of resource i.
double CurrentRecommendation(const SimState& state, const SimConfig& config,
                             std::size_t i);

// Generates signals, propagates them, and appends metrics.
void Step(SimState& state, const SimConfig& config);

// Runs `config.iterations` steps and returns the metric history.
std::vector<SimMetrics> RunSimulation(const SimConfig& config);

// First iteration whose `quantile`-th percentile profile error is at most
// `threshold`. Throws EmptyHistory on an empty history.
std::optional<std::size_t> ConvergenceIteration(
    std::span<const SimMetrics> history, double threshold = 0.5);

// Mean RMSE per iteration over seeds base_seed .. base_seed + num_seeds - 1.
std::vector<double> MeanRmseCurve(SimConfig config, std::size_t num_seeds);

struct SimGridCell {
  double signal_noise = 0.0;
  double sigma = 0.0;
  // Averaged over signal rates and seeds; runs that never converge count as
  // the full horizon.
  double mean_convergence = 0.0;
  double converged_fraction = 0.0;
};

std::vector<SimGridCell> RunGrid(const SimConfig& base,
                                 std::span<const double> noises,
                                 std::span<const double> sigmas,
                                 std::span<const double> rates,
                                 std::size_t seeds_per_cell);

void WriteSimMetrics(const std::filesystem::path& path,
                     std::span<const SimMetrics> history);
void WriteSimGrid(const std::filesystem::path& path,
                  std::span<const SimGridCell> grid);

}  // namespace skurec

#endif  // SKUREC_SIMULATOR_H_

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

#include "skurec/simulator.h"

#include <algorithm>
#include <cmath>

#include "skurec/csv.h"
#include "skurec/provisioners.h"

namespace skurec {

namespace {

constexpr double kConvergenceQuantile = 80.0;

double Percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return NearestRankPercentile(values, p);
}

std::string GroupName(std::size_t c, std::size_t s, std::size_t g) {
  return "rg" + std::to_string(c) + "-" + std::to_string(s) + "-" +
         std::to_string(g);
}

void Record(SimState& state, const SimConfig& config, std::size_t n_signals) {
  const auto errors = ProfileErrors(state, config);
  double sq = 0.0;
  for (double e : errors) sq += e * e;
  SimMetrics m;
  m.iteration = state.history.size();
  m.rmse = std::sqrt(sq / static_cast<double>(errors.size()));
  m.p80_error = Percentile(errors, kConvergenceQuantile);
  m.n_signals = n_signals;
  state.history.push_back(m);
}

}  // namespace

void SimConfig::Validate() const {
  if (customers.empty() || subscriptions.empty() ||
      groups_per_subscription == 0 || stratifications.empty()) {
    throw Error(ErrorCode::kConfig, "simulation needs a non-empty topology");
  }
  if (min_resources == 0 || min_resources > max_resources) {
    throw Error(ErrorCode::kConfig, "invalid resources-per-group range");
  }
  if (!(signal_rate >= 0.0 && signal_rate <= 1.0) ||
      !(signal_noise >= 0.0 && signal_noise <= 1.0)) {
    throw Error(ErrorCode::kConfig, "signal rate and noise must lie in [0, 1]");
  }
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kConfig, "sigma must be >= 0");
  CandidateSet(Offering::Custom("sim"), candidates);
  propagation.Validate();
}

nlohmann::json SimConfig::ToJson() const {
  auto pairs = [](const std::vector<std::pair<std::string, double>>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [name, lambda] : v) {
      out.push_back({{"name", name}, {"lambda", lambda}});
    }
    return out;
  };
  return {{"customers", pairs(customers)},
          {"subscriptions", pairs(subscriptions)},
          {"groups_per_subscription", groups_per_subscription},
          {"min_resources", min_resources},
          {"max_resources", max_resources},
          {"candidates", candidates},
          {"stratifications", stratifications},
          {"sigma", sigma},
          {"signal_rate", signal_rate},
          {"signal_noise", signal_noise},
          {"iterations", iterations},
          {"learning_rate", propagation.learning_rate},
          {"rho_r", propagation.rho_r},
          {"rho_s", propagation.rho_s},
          {"rho_c", propagation.rho_c},
          {"epsilon_mode", epsilon_mode == EpsilonMode::kMultiplicative
                               ? "multiplicative"
                               : "additive"},
          {"log_base", log_base},
          {"seed", seed}};
}

SimConfig SimConfig::FromJson(const nlohmann::json& j) {
  SimConfig c;
  auto pairs = [](const nlohmann::json& v) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& e : v) {
      out.emplace_back(e.at("name").get<std::string>(),
                       e.at("lambda").get<double>());
    }
    return out;
  };
  try {
    if (j.contains("customers")) c.customers = pairs(j.at("customers"));
    if (j.contains("subscriptions")) {
      c.subscriptions = pairs(j.at("subscriptions"));
    }
    c.groups_per_subscription =
        j.value("groups_per_subscription", c.groups_per_subscription);
    c.min_resources = j.value("min_resources", c.min_resources);
    c.max_resources = j.value("max_resources", c.max_resources);
    c.candidates = j.value("candidates", c.candidates);
    c.stratifications = j.value("stratifications", c.stratifications);
    c.sigma = j.value("sigma", c.sigma);
    c.signal_rate = j.value("signal_rate", c.signal_rate);
    c.signal_noise = j.value("signal_noise", c.signal_noise);
    c.iterations = j.value("iterations", c.iterations);
    c.propagation.learning_rate =
        j.value("learning_rate", c.propagation.learning_rate);
    c.propagation.rho_r = j.value("rho_r", c.propagation.rho_r);
    c.propagation.rho_s = j.value("rho_s", c.propagation.rho_s);
    c.propagation.rho_c = j.value("rho_c", c.propagation.rho_c);
    const std::string mode = j.value("epsilon_mode", "multiplicative");
    if (mode == "multiplicative") {
      c.epsilon_mode = EpsilonMode::kMultiplicative;
    } else if (mode == "additive") {
      c.epsilon_mode = EpsilonMode::kAdditive;
    } else {
      throw Error(ErrorCode::kConfig, "unknown epsilon_mode '" + mode + "'");
    }
    c.log_base = j.value("log_base", c.log_base);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig,
                std::string("malformed simulation config: ") + e.what());
  }
  return c;
}

SimState InitSim(const SimConfig& config) {
  config.Validate();
  const LogTransform xi(config.log_base);
  SimState state{{}, {}, LambdaStore(config.stratifications), {},
                 std::mt19937_64(config.seed)};
  auto& rng = state.rng;
  std::uniform_int_distribution<std::size_t> count(config.min_resources,
                                                   config.max_resources);
  std::uniform_int_distribution<std::size_t> pick_c(
      0, config.candidates.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_st(
      0, config.stratifications.size() - 1);
  std::normal_distribution<double> log_eps(0.0, 1.0);

  for (std::size_t c = 0; c < config.customers.size(); ++c) {
    for (std::size_t s = 0; s < config.subscriptions.size(); ++s) {
      const double lambda =
          config.customers[c].second + config.subscriptions[s].second;
      for (std::size_t g = 0; g < config.groups_per_subscription; ++g) {
        SimProfile profile{c, s, GroupName(c, s, g), {}, lambda};
        state.estimates.Register(config.customers[c].first,
                                 config.subscriptions[s].first,
                                 profile.resource_group);
        const std::size_t n = count(rng);
        for (std::size_t k = 0; k < n; ++k) {
          SimResource r;
          r.customer = c;
          r.subscription = s;
          r.resource_group = profile.resource_group;
          r.stratification = config.stratifications[pick_st(rng)];
          r.lambda_true = lambda;
          r.c_star = config.candidates[pick_c(rng)];
          r.epsilon = std::exp2(config.sigma * log_eps(rng));
          r.c_bar_star = config.epsilon_mode == EpsilonMode::kMultiplicative
                             ? r.epsilon * r.c_star
                             : r.c_star + r.epsilon;
          // On the grid, so that a perfectly personalized recommendation can
          // match it.
          r.c_bar_2star =
              Discretize(std::pow(xi.base(), lambda) * r.c_bar_star,
                         config.candidates, xi);
          if (std::find(profile.stratifications.begin(),
                        profile.stratifications.end(),
                        r.stratification) == profile.stratifications.end()) {
            profile.stratifications.push_back(r.stratification);
          }
          state.resources.push_back(std::move(r));
        }
        std::sort(profile.stratifications.begin(),
                  profile.stratifications.end());
        state.profiles.push_back(std::move(profile));
      }
    }
  }
  Record(state, config, 0);
  return state;
}

std::vector<double> ProfileErrors(const SimState& state,
                                  const SimConfig& config) {
  std::vector<double> out;
  out.reserve(state.profiles.size());
  for (const auto& p : state.profiles) {
    double sum = 0.0;
    for (const auto& st : p.stratifications) {
      const double hat = state.estimates.Lookup(
          config.customers[p.customer].first,
          config.subscriptions[p.subscription].first, p.resource_group, st);
      sum += std::abs(p.lambda_true - hat);
    }
    out.push_back(sum / static_cast<double>(p.stratifications.size()));
  }
  return out;
}

double CurrentRecommendation(const SimState& state, const SimConfig& config,
                             std::size_t i) {
  const SimResource& r = state.resources[i];
  const double hat = state.estimates.Lookup(
      config.customers[r.customer].first,
      config.subscriptions[r.subscription].first, r.resource_group,
      r.stratification);
  return Adjust(r.c_star, hat, LogTransform(config.log_base),
                config.candidates);
}

void Step(SimState& state, const SimConfig& config) {
  std::bernoulli_distribution survive(config.signal_rate);
  std::bernoulli_distribution flip(config.signal_noise);
  std::vector<SatisfactionSignal> signals;
  for (std::size_t i = 0; i < state.resources.size(); ++i) {
    const SimResource& r = state.resources[i];
    const double current = CurrentRecommendation(state, config, i);
    double gamma = 0.0;
    if (current > r.c_bar_2star) {
      gamma = -1.0;
    } else if (current < r.c_bar_2star) {
      gamma = 1.0;
    } else {
      continue;
    }
    if (!survive(state.rng)) continue;
    if (flip(state.rng)) gamma = -gamma;
    signals.push_back({{config.customers[r.customer].first,
                        config.subscriptions[r.subscription].first,
                        r.resource_group, r.stratification},
                       gamma,
                       SignalSource::kSynthetic});
  }
  for (const auto& sig : signals) {
    Propagate(state.estimates, sig, config.propagation);
  }
  Record(state, config, signals.size());
}

std::vector<SimMetrics> RunSimulation(const SimConfig& config) {
  SimState state = InitSim(config);
  for (std::size_t t = 0; t < config.iterations; ++t) Step(state, config);
  return state.history;
}

std::optional<std::size_t> ConvergenceIteration(
    std::span<const SimMetrics> history, double threshold) {
  if (history.empty()) {
    throw Error(ErrorCode::kEmptyHistory, "no simulation history");
  }
  for (const auto& m : history) {
    if (m.p80_error <= threshold) return m.iteration;
  }
  return std::nullopt;
}

std::vector<double> MeanRmseCurve(SimConfig config, std::size_t num_seeds) {
  if (num_seeds == 0) throw Error(ErrorCode::kConfig, "need at least one seed");
  const std::uint64_t base = config.seed;
  std::vector<double> mean(config.iterations + 1, 0.0);
  for (std::size_t k = 0; k < num_seeds; ++k) {
    config.seed = base + k;
    const auto history = RunSimulation(config);
    for (std::size_t t = 0; t < history.size(); ++t) mean[t] += history[t].rmse;
  }
  for (double& v : mean) v /= static_cast<double>(num_seeds);
  return mean;
}

std::vector<SimGridCell> RunGrid(const SimConfig& base,
                                 std::span<const double> noises,
                                 std::span<const double> sigmas,
                                 std::span<const double> rates,
                                 std::size_t seeds_per_cell) {
  if (rates.empty() || seeds_per_cell == 0) {
    throw Error(ErrorCode::kConfig, "grid needs rates and seeds");
  }
  std::vector<SimGridCell> out;
  for (double noise : noises) {
    for (double sigma : sigmas) {
      SimGridCell cell;
      cell.signal_noise = noise;
      cell.sigma = sigma;
      std::size_t runs = 0;
      std::size_t converged = 0;
      for (double rate : rates) {
        for (std::size_t k = 0; k < seeds_per_cell; ++k) {
          SimConfig c = base;
          c.signal_noise = noise;
          c.sigma = sigma;
          c.signal_rate = rate;
          c.seed = base.seed + k;
          const auto it = ConvergenceIteration(RunSimulation(c));
          cell.mean_convergence +=
              static_cast<double>(it.value_or(c.iterations));
          if (it) ++converged;
          ++runs;
        }
      }
      cell.mean_convergence /= static_cast<double>(runs);
      cell.converged_fraction =
          static_cast<double>(converged) / static_cast<double>(runs);
      out.push_back(cell);
    }
  }
  return out;
}

void WriteSimMetrics(const std::filesystem::path& path,
                     std::span<const SimMetrics> history) {
  csv::Writer out(path);
  out.Row({"iteration", "rmse", "p80_error", "n_signals"});
  for (const auto& m : history) {
    out.Row({std::to_string(m.iteration), csv::FormatNumber(m.rmse),
             csv::FormatNumber(m.p80_error), std::to_string(m.n_signals)});
  }
  out.Close();
}

void WriteSimGrid(const std::filesystem::path& path,
                  std::span<const SimGridCell> grid) {
  csv::Writer out(path);
  out.Row({"signal_noise", "sigma", "mean_convergence", "converged_fraction"});
  for (const auto& c : grid) {
    out.Row({csv::FormatNumber(c.signal_noise), csv::FormatNumber(c.sigma),
             csv::FormatNumber(c.mean_convergence),
             csv::FormatNumber(c.converged_fraction)});
  }
  out.Close();
}

}  // namespace skurec

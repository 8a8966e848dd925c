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

#include "skurec/rightsizer.h"

#include <cmath>
#include <limits>
#include <string>

namespace skurec {

namespace {

constexpr double kDefaultEta = 0.95;
constexpr double kDefaultSlackTarget = 0.5;

double Broadcast(const std::vector<double>& values, std::size_t r,
                 double fallback) {
  if (values.empty()) return fallback;
  if (values.size() == 1) return values.front();
  return values.at(r);
}

void RequireNonEmpty(const ResampledWorkload& w) {
  if (w.empty()) {
    throw Error(ErrorCode::kEmptyWorkload, "workload has no bins");
  }
}

}  // namespace

double RightsizerConfig::Eta(std::size_t r) const {
  return Broadcast(utilization_threshold, r, kDefaultEta);
}

double RightsizerConfig::SlackTarget(std::size_t r) const {
  return Broadcast(slack_target, r, kDefaultSlackTarget);
}

std::vector<double> RightsizerConfig::Etas(std::size_t num_dims) const {
  std::vector<double> out(num_dims);
  for (std::size_t r = 0; r < num_dims; ++r) out[r] = Eta(r);
  return out;
}

void RightsizerConfig::Validate() const {
  if (!(bin_width_min > 0.0)) {
    throw Error(ErrorCode::kConfig, "bin width must be positive");
  }
  for (double eta : utilization_threshold) {
    if (!(eta > 0.0 && eta < 1.0)) {
      throw Error(ErrorCode::kConfig, "utilization threshold must be in (0,1)");
    }
  }
  for (double s : slack_target) {
    if (!(s >= 0.0 && s < 1.0)) {
      throw Error(ErrorCode::kConfig, "slack target must be in [0,1)");
    }
  }
  if (!(throttling_bound >= 0.0 && throttling_bound <= 1.0)) {
    throw Error(ErrorCode::kConfig, "throttling bound must be in [0,1]");
  }
  if (censoring_exponent < 1) {
    throw Error(ErrorCode::kConfig, "censoring exponent must be >= 1");
  }
}

double ThrottlingProbability(const ResampledWorkload& w,
                             const CapacityVector& capacity,
                             std::span<const double> eta) {
  RequireNonEmpty(w);
  const std::size_t dims = w.num_dims();
  if (capacity.size() != dims || eta.size() != dims) {
    throw Error(ErrorCode::kConfig, "dimension mismatch");
  }
  std::size_t throttled = 0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    auto v = w.values(n);
    for (std::size_t r = 0; r < dims; ++r) {
      if (v[r] > eta[r] * capacity[r]) {
        ++throttled;
        break;
      }
    }
  }
  return static_cast<double>(throttled) / static_cast<double>(w.size());
}

double ThrottlingProbability(const ResampledWorkload& w, std::size_t r,
                             double capacity, double eta) {
  RequireNonEmpty(w);
  const double limit = eta * capacity;
  std::size_t throttled = 0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    if (w.value(n, r) > limit) ++throttled;
  }
  return static_cast<double>(throttled) / static_cast<double>(w.size());
}

std::vector<double> SlackRatio(const ResampledWorkload& w,
                               const CapacityVector& capacity) {
  RequireNonEmpty(w);
  if (capacity.size() != w.num_dims()) {
    throw Error(ErrorCode::kConfig, "dimension mismatch");
  }
  std::vector<double> out(w.num_dims());
  for (std::size_t r = 0; r < w.num_dims(); ++r) {
    out[r] = SlackRatio(w, r, capacity[r]);
  }
  return out;
}

double SlackRatio(const ResampledWorkload& w, std::size_t r, double capacity) {
  RequireNonEmpty(w);
  double sum = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    sum += (capacity - w.value(n, r)) / capacity;
  }
  return sum / static_cast<double>(w.size());
}

RightsizeResult Rightsize(const ResampledWorkload& w,
                          const CapacityVector& user_capacity,
                          std::span<const CandidateSet> candidates,
                          const RightsizerConfig& config) {
  config.Validate();
  RequireNonEmpty(w);
  const std::size_t dims = w.num_dims();
  if (candidates.size() != dims || user_capacity.size() != dims) {
    throw Error(ErrorCode::kConfig,
                "need one candidate set and user capacity per dimension");
  }
  const std::vector<double> eta = config.Etas(dims);

  RightsizeResult result;
  result.censored = ThrottlingProbability(w, user_capacity, eta) > 0.0;
  result.constraint_infeasible.assign(dims, false);
  const double growth = std::exp2(config.censoring_exponent);

  std::vector<double> chosen(dims);
  for (std::size_t r = 0; r < dims; ++r) {
    const double target = config.SlackTarget(r);
    double best_score = std::numeric_limits<double>::infinity();
    bool found = false;
    for (double c : candidates[r].values()) {
      CapacityVector trial = user_capacity.With(r, c);
      CandidateDiagnostics diag;
      diag.dim = r;
      diag.candidate = c;
      diag.slack = SlackRatio(w, trial);
      diag.throttling = ThrottlingProbability(w, trial, eta);
      diag.feasible = result.censored
                          ? c >= growth * user_capacity[r]
                          : diag.throttling <= config.throttling_bound;
      if (diag.feasible) {
        // Candidates ascend, so strict < keeps the smaller one on ties.
        const double score = std::abs(diag.slack[r] - target);
        if (score < best_score) {
          best_score = score;
          chosen[r] = c;
          found = true;
        }
      }
      result.diagnostics.push_back(std::move(diag));
    }
    if (!found) {
      chosen[r] = candidates[r].max();
      result.constraint_infeasible[r] = true;
    }
  }
  result.capacity = CapacityVector(std::move(chosen));
  return result;
}

RightsizeResult Rightsize(const ResampledWorkload& w, double user_capacity,
                          const CandidateSet& candidates,
                          const RightsizerConfig& config) {
  return Rightsize(w, CapacityVector({user_capacity}),
                   std::span<const CandidateSet>(&candidates, 1), config);
}

}  // namespace skurec

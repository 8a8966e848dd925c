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

#ifndef SKUREC_RIGHTSIZER_H_
#define SKUREC_RIGHTSIZER_H_

#include <cstddef>
#include <span>
#include <vector>

#include "skurec/core.h"

namespace skurec {

// Defaults: T = 5 min, eta = 0.95, s* = 0.5, tau = 0, K = 1.
struct RightsizerConfig {
  double bin_width_min = 5.0;
  // Per-dimension utilization thresholds; a single entry applies to all
  // dimensions, an empty list means 0.95 everywhere.
  std::vector<double> utilization_threshold;
  // Per-dimension slack targets, broadcast the same way (default 0.5).
  std::vector<double> slack_target;
  double throttling_bound = 0.0;
  int censoring_exponent = 1;

  double Eta(std::size_t r) const;
  double SlackTarget(std::size_t r) const;
  std::vector<double> Etas(std::size_t num_dims) const;
  // Throws ConfigError when a field is out of range.
  void Validate() const;
};

// Fraction of bins in which some dimension exceeds eta_r * c_r.
double ThrottlingProbability(const ResampledWorkload& w,
                             const CapacityVector& capacity,
                             std::span<const double> eta);

// Same statistic restricted to a single dimension r.
double ThrottlingProbability(const ResampledWorkload& w, std::size_t r,
                             double capacity, double eta);

// Mean over bins of (c_r - w_r[n]) / c_r, per dimension.
std::vector<double> SlackRatio(const ResampledWorkload& w,
                               const CapacityVector& capacity);
double SlackRatio(const ResampledWorkload& w, std::size_t r, double capacity);

struct CandidateDiagnostics {
  std::size_t dim = 0;
  double candidate = 0.0;
  std::vector<double> slack;
  double throttling = 0.0;
  bool feasible = false;
};

struct RightsizeResult {
  CapacityVector capacity;
  bool censored = false;
  // Per dimension: no candidate satisfied the constraint and the largest
  // candidate was returned.
  std::vector<bool> constraint_infeasible;
  std::vector<CandidateDiagnostics> diagnostics;
};

// Picks, per dimension, the candidate whose slack ratio is closest to the
// slack target. Uncensored workloads (no throttling at the user capacity)
// must keep throttling probability within the bound; censored workloads
// must grow to at least 2^K times the user capacity. Ties go to the
// smaller capacity.
RightsizeResult Rightsize(const ResampledWorkload& w,
                          const CapacityVector& user_capacity,
                          std::span<const CandidateSet> candidates,
                          const RightsizerConfig& config);

// Convenience overload for single-dimension workloads.
RightsizeResult Rightsize(const ResampledWorkload& w, double user_capacity,
                          const CandidateSet& candidates,
                          const RightsizerConfig& config);

}  // namespace skurec

#endif  // SKUREC_RIGHTSIZER_H_

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

#ifndef SKUREC_EVALUATOR_H_
#define SKUREC_EVALUATOR_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skurec/core.h"

namespace skurec {

// S_r(c) * c_r per dimension.
std::vector<double> AbsoluteSlack(const ResampledWorkload& w,
                                  const CapacityVector& capacity);
double AbsoluteSlack(const ResampledWorkload& w, std::size_t r,
                     double capacity);

// Fraction of workloads whose throttling probability exceeds tau.
double ThrottlingRatio(std::span<const ResampledWorkload> workloads,
                       std::span<const CapacityVector> capacities,
                       std::span<const double> eta, double tau);

// One dimension of one workload, preprocessed so that slack and throttling
// at any capacity cost O(log n).
class EvalWorkload {
 public:
  EvalWorkload(const ResampledWorkload& w, std::size_t r, double eta,
               Offering offering, std::vector<double> candidates);

  const Offering& offering() const { return offering_; }
  std::span<const double> candidates() const { return candidates_; }
  std::size_t num_bins() const { return sorted_.size(); }
  double bin_width() const { return bin_width_; }

  double AbsoluteSlack(double capacity) const;
  double Throttling(double capacity) const;
  std::size_t ThrottledBins(double capacity) const;

 private:
  Offering offering_;
  std::vector<double> candidates_;
  std::vector<double> sorted_;
  double mean_ = 0.0;
  double eta_ = 0.95;
  double bin_width_ = 5.0;
};

struct EvalPoint {
  double exponent = 0.0;
  double mean_abs_slack = 0.0;
  double throttling_ratio = 0.0;
  bool dominated = false;
  // Chosen default per offering, for baseline points.
  std::string label;
};

// Mean absolute slack and throttling ratio of the given capacities.
EvalPoint Evaluate(std::span<const EvalWorkload> workloads,
                   std::span<const double> capacities, double tau);

// Flags every point that is dominated by, or duplicates, another point and
// returns the remaining frontier sorted by throttling ratio with strictly
// decreasing slack.
std::vector<EvalPoint> MarkFrontier(std::vector<EvalPoint>& points);

// -3, -2.5, ..., 3.
std::vector<double> DefaultExponents();

struct CurveResult {
  std::vector<EvalPoint> points;    // one per exponent, flagged
  std::vector<EvalPoint> frontier;  // non-dominated subset
};

// Scales every raw prediction by 2^e, discretizes it to the workload's
// candidates and evaluates, for each exponent e.
CurveResult ParetoCurve(std::span<const double> predictions,
                        std::span<const EvalWorkload> workloads,
                        std::span<const double> exponents, double tau,
                        const LogTransform& transform = LogTransform());

// Enumerates one default candidate per offering (at most `max_per_offering`
// per offering, picked at quantiles) and evaluates every combination.
CurveResult DefaultBaseline(std::span<const EvalWorkload> workloads,
                            double tau, std::size_t max_per_offering = 10);

// Lowest-slack point with throttling ratio strictly below `bound`.
std::optional<EvalPoint> BestUnderThrottling(std::span<const EvalPoint> curve,
                                             double bound = 0.10);

struct CostTotals {
  double vcores = 0.0;
  double throttled_hours = 0.0;
};

// Totals over the given workloads at the given capacities.
CostTotals MeasureCost(std::span<const EvalWorkload> workloads,
                       std::span<const double> capacities);

// Scales test-set totals over `sample_size` servers to `population` servers.
CostTotals ExtrapolateCost(const CostTotals& sample, std::size_t sample_size,
                           std::size_t population);

// Per-series rows for curves.csv.
void WriteCurves(const std::filesystem::path& path,
                 const std::map<std::string, CurveResult>& curves);

}  // namespace skurec

#endif  // SKUREC_EVALUATOR_H_

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

#include "skurec/evaluator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "skurec/csv.h"
#include "skurec/rightsizer.h"

namespace skurec {

std::vector<double> AbsoluteSlack(const ResampledWorkload& w,
                                  const CapacityVector& capacity) {
  std::vector<double> out = SlackRatio(w, capacity);
  for (std::size_t r = 0; r < out.size(); ++r) out[r] *= capacity[r];
  return out;
}

double AbsoluteSlack(const ResampledWorkload& w, std::size_t r,
                     double capacity) {
  return SlackRatio(w, r, capacity) * capacity;
}

double ThrottlingRatio(std::span<const ResampledWorkload> workloads,
                       std::span<const CapacityVector> capacities,
                       std::span<const double> eta, double tau) {
  if (workloads.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no workloads to evaluate");
  }
  if (capacities.size() != workloads.size()) {
    throw Error(ErrorCode::kConfig, "one capacity per workload required");
  }
  std::size_t throttled = 0;
  for (std::size_t i = 0; i < workloads.size(); ++i) {
    if (ThrottlingProbability(workloads[i], capacities[i], eta) > tau) {
      ++throttled;
    }
  }
  return static_cast<double>(throttled) /
         static_cast<double>(workloads.size());
}

EvalWorkload::EvalWorkload(const ResampledWorkload& w, std::size_t r,
                           double eta, Offering offering,
                           std::vector<double> candidates)
    : offering_(std::move(offering)),
      candidates_(std::move(candidates)),
      eta_(eta),
      bin_width_(w.bin_width()) {
  if (w.empty()) throw Error(ErrorCode::kEmptyWorkload, "empty workload");
  if (r >= w.num_dims()) throw Error(ErrorCode::kConfig, "dimension out of range");
  if (candidates_.empty()) {
    throw Error(ErrorCode::kConfig, "workload has no candidates");
  }
  sorted_.reserve(w.size());
  double sum = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    sorted_.push_back(w.value(n, r));
    sum += sorted_.back();
  }
  std::sort(sorted_.begin(), sorted_.end());
  mean_ = sum / static_cast<double>(sorted_.size());
}

// mean_n (c - w[n]) equals S(c) * c.
double EvalWorkload::AbsoluteSlack(double capacity) const {
  return capacity - mean_;
}

std::size_t EvalWorkload::ThrottledBins(double capacity) const {
  const double limit = eta_ * capacity;
  return static_cast<std::size_t>(
      sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), limit));
}

double EvalWorkload::Throttling(double capacity) const {
  return static_cast<double>(ThrottledBins(capacity)) /
         static_cast<double>(sorted_.size());
}

EvalPoint Evaluate(std::span<const EvalWorkload> workloads,
                   std::span<const double> capacities, double tau) {
  if (workloads.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no workloads to evaluate");
  }
  if (capacities.size() != workloads.size()) {
    throw Error(ErrorCode::kConfig, "one capacity per workload required");
  }
  double slack = 0.0;
  std::size_t throttled = 0;
  for (std::size_t i = 0; i < workloads.size(); ++i) {
    slack += workloads[i].AbsoluteSlack(capacities[i]);
    if (workloads[i].Throttling(capacities[i]) > tau) ++throttled;
  }
  const auto n = static_cast<double>(workloads.size());
  EvalPoint p;
  p.mean_abs_slack = slack / n;
  p.throttling_ratio = static_cast<double>(throttled) / n;
  return p;
}

std::vector<EvalPoint> MarkFrontier(std::vector<EvalPoint>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].throttling_ratio != points[b].throttling_ratio) {
      return points[a].throttling_ratio < points[b].throttling_ratio;
    }
    return points[a].mean_abs_slack < points[b].mean_abs_slack;
  });
  std::vector<EvalPoint> frontier;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : order) {
    points[i].dominated = !(points[i].mean_abs_slack < best);
    if (!points[i].dominated) {
      best = points[i].mean_abs_slack;
      frontier.push_back(points[i]);
    }
  }
  return frontier;
}

std::vector<double> DefaultExponents() {
  std::vector<double> out;
  for (int k = -6; k <= 6; ++k) out.push_back(0.5 * k);
  return out;
}

CurveResult ParetoCurve(std::span<const double> predictions,
                        std::span<const EvalWorkload> workloads,
                        std::span<const double> exponents, double tau,
                        const LogTransform& transform) {
  if (predictions.size() != workloads.size()) {
    throw Error(ErrorCode::kConfig, "one prediction per workload required");
  }
  CurveResult out;
  std::vector<double> capacities(workloads.size());
  for (double e : exponents) {
    const double scale = std::pow(transform.base(), e);
    for (std::size_t i = 0; i < workloads.size(); ++i) {
      capacities[i] = Discretize(predictions[i] * scale,
                                 workloads[i].candidates(), transform);
    }
    EvalPoint p = Evaluate(workloads, capacities, tau);
    p.exponent = e;
    out.points.push_back(std::move(p));
  }
  out.frontier = MarkFrontier(out.points);
  return out;
}

CurveResult DefaultBaseline(std::span<const EvalWorkload> workloads,
                            double tau, std::size_t max_per_offering) {
  if (workloads.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no workloads to evaluate");
  }
  if (max_per_offering == 0) {
    throw Error(ErrorCode::kConfig, "need at least one default per offering");
  }
  struct Group {
    std::vector<double> defaults;
    std::vector<double> slack;        // summed over the group's workloads
    std::vector<std::size_t> throttled;
  };
  std::map<Offering, Group> groups;
  for (const auto& w : workloads) {
    Group& g = groups[w.offering()];
    if (g.defaults.empty()) {
      const auto c = w.candidates();
      if (c.size() <= max_per_offering) {
        g.defaults.assign(c.begin(), c.end());
      } else {
        for (std::size_t k = 0; k < max_per_offering; ++k) {
          const double q = max_per_offering == 1
                               ? 0.0
                               : static_cast<double>(k) /
                                     static_cast<double>(max_per_offering - 1);
          const auto idx = static_cast<std::size_t>(
              std::lround(q * static_cast<double>(c.size() - 1)));
          if (g.defaults.empty() || g.defaults.back() != c[idx]) {
            g.defaults.push_back(c[idx]);
          }
        }
      }
      g.slack.assign(g.defaults.size(), 0.0);
      g.throttled.assign(g.defaults.size(), 0);
    }
    for (std::size_t k = 0; k < g.defaults.size(); ++k) {
      g.slack[k] += w.AbsoluteSlack(g.defaults[k]);
      if (w.Throttling(g.defaults[k]) > tau) ++g.throttled[k];
    }
  }

  std::vector<const Group*> order;
  std::vector<Offering> names;
  for (const auto& [offering, g] : groups) {
    order.push_back(&g);
    names.push_back(offering);
  }
  const auto n = static_cast<double>(workloads.size());
  CurveResult out;
  std::vector<std::size_t> pick(order.size(), 0);
  while (true) {
    EvalPoint p;
    double slack = 0.0;
    std::size_t throttled = 0;
    for (std::size_t g = 0; g < order.size(); ++g) {
      slack += order[g]->slack[pick[g]];
      throttled += order[g]->throttled[pick[g]];
      if (!p.label.empty()) p.label += '|';
      p.label += names[g].Name() + "=" +
                 csv::FormatNumber(order[g]->defaults[pick[g]]);
    }
    p.exponent = std::numeric_limits<double>::quiet_NaN();
    p.mean_abs_slack = slack / n;
    p.throttling_ratio = static_cast<double>(throttled) / n;
    out.points.push_back(std::move(p));

    std::size_t g = 0;
    while (g < order.size() && ++pick[g] == order[g]->defaults.size()) {
      pick[g++] = 0;
    }
    if (g == order.size()) break;
  }
  out.frontier = MarkFrontier(out.points);
  return out;
}

std::optional<EvalPoint> BestUnderThrottling(std::span<const EvalPoint> curve,
                                             double bound) {
  std::optional<EvalPoint> best;
  for (const auto& p : curve) {
    if (p.throttling_ratio < bound &&
        (!best || p.mean_abs_slack < best->mean_abs_slack)) {
      best = p;
    }
  }
  return best;
}

CostTotals MeasureCost(std::span<const EvalWorkload> workloads,
                       std::span<const double> capacities) {
  if (capacities.size() != workloads.size()) {
    throw Error(ErrorCode::kConfig, "one capacity per workload required");
  }
  CostTotals t;
  for (std::size_t i = 0; i < workloads.size(); ++i) {
    t.vcores += capacities[i];
    t.throttled_hours += static_cast<double>(
                             workloads[i].ThrottledBins(capacities[i])) *
                         workloads[i].bin_width() / 60.0;
  }
  return t;
}

CostTotals ExtrapolateCost(const CostTotals& sample, std::size_t sample_size,
                           std::size_t population) {
  if (sample_size == 0) {
    throw Error(ErrorCode::kEmptyDataset, "empty test set");
  }
  const double factor =
      static_cast<double>(population) / static_cast<double>(sample_size);
  return {sample.vcores * factor, sample.throttled_hours * factor};
}

void WriteCurves(const std::filesystem::path& path,
                 const std::map<std::string, CurveResult>& curves) {
  csv::Writer out(path);
  out.Row({"model", "exponent", "mean_abs_slack", "throttling_ratio",
           "dominated"});
  for (const auto& [model, curve] : curves) {
    for (const auto& p : curve.points) {
      out.Row({model,
               std::isnan(p.exponent) ? p.label : csv::FormatNumber(p.exponent),
               csv::FormatNumber(p.mean_abs_slack),
               csv::FormatNumber(p.throttling_ratio),
               p.dominated ? "1" : "0"});
    }
  }
  out.Close();
}

}  // namespace skurec

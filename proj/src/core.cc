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

#include "skurec/core.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace skurec {

namespace {

// Relative tolerance for deciding that a value sits exactly between two
// candidates in log space.
constexpr double kTieTolerance = 1e-9;

}  // namespace

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyTrace:
      return "EmptyTrace";
    case ErrorCode::kDomain:
      return "DomainError";
    case ErrorCode::kEmptyWorkload:
      return "EmptyWorkload";
    case ErrorCode::kConfig:
      return "ConfigError";
    case ErrorCode::kNotFitted:
      return "NotFitted";
    case ErrorCode::kNoHierarchy:
      return "NoHierarchy";
    case ErrorCode::kEmptyDataset:
      return "EmptyDataset";
    case ErrorCode::kEmptyHistory:
      return "EmptyHistory";
    case ErrorCode::kInput:
      return "InputError";
    case ErrorCode::kLocked:
      return "Locked";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

void ValidateDims(std::span<const ResourceDim> dims) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i].index != static_cast<int>(i)) {
      throw Error(ErrorCode::kConfig, "resource dimension indices not dense");
    }
    if (!names.insert(dims[i].name).second) {
      throw Error(ErrorCode::kConfig,
                  "duplicate resource dimension '" + dims[i].name + "'");
    }
  }
}

Offering::Offering(Kind kind) : kind_(kind) {
  if (kind == Kind::kCustom) {
    throw Error(ErrorCode::kConfig, "custom offering requires a name");
  }
}

Offering Offering::Custom(std::string name) {
  Offering o = Parse(name);
  return o;
}

Offering Offering::Parse(std::string_view name) {
  if (name == "Burstable") return Offering(Kind::kBurstable);
  if (name == "GeneralPurpose") return Offering(Kind::kGeneralPurpose);
  if (name == "MemoryOptimized") return Offering(Kind::kMemoryOptimized);
  if (name.empty()) throw Error(ErrorCode::kConfig, "empty offering name");
  Offering o;
  o.kind_ = Kind::kCustom;
  o.custom_ = std::string(name);
  return o;
}

std::string Offering::Name() const {
  switch (kind_) {
    case Kind::kBurstable:
      return "Burstable";
    case Kind::kGeneralPurpose:
      return "GeneralPurpose";
    case Kind::kMemoryOptimized:
      return "MemoryOptimized";
    case Kind::kCustom:
      return custom_;
  }
  return custom_;
}

CandidateSet::CandidateSet(Offering offering, std::vector<double> values)
    : offering_(std::move(offering)), values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorCode::kConfig,
                "empty candidate set for " + offering_.Name());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      throw Error(ErrorCode::kConfig, "candidate capacities must be positive");
    }
    if (i > 0 && !(values_[i] > values_[i - 1])) {
      throw Error(ErrorCode::kConfig,
                  "candidate capacities must be strictly ascending");
    }
  }
}

bool CandidateSet::Contains(double value) const {
  return std::binary_search(values_.begin(), values_.end(), value);
}

CapacityVector::CapacityVector(std::vector<double> values)
    : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kDomain, "capacities must be positive");
    }
  }
}

CapacityVector CapacityVector::With(std::size_t r, double value) const {
  std::vector<double> copy = values_;
  copy.at(r) = value;
  return CapacityVector(std::move(copy));
}

WorkloadTrace::WorkloadTrace(std::string resource_id, std::size_t num_dims)
    : resource_id_(std::move(resource_id)), num_dims_(num_dims) {
  if (num_dims_ == 0) {
    throw Error(ErrorCode::kConfig, "trace needs at least one dimension");
  }
}

void WorkloadTrace::Append(double timestamp_min,
                           std::span<const double> usage) {
  if (usage.size() != num_dims_) {
    throw Error(ErrorCode::kInput, "usage vector has wrong dimension count");
  }
  if (!std::isfinite(timestamp_min)) {
    throw Error(ErrorCode::kInput, "non-finite timestamp");
  }
  if (!timestamps_.empty() && timestamp_min < timestamps_.back()) {
    throw Error(ErrorCode::kInput, "trace timestamps must be non-decreasing");
  }
  for (double u : usage) {
    if (!(u >= 0.0) || !std::isfinite(u)) {
      throw Error(ErrorCode::kInput, "usage must be finite and non-negative");
    }
  }
  timestamps_.push_back(timestamp_min);
  values_.insert(values_.end(), usage.begin(), usage.end());
}

std::vector<double> WorkloadTrace::PeakUsage() const {
  std::vector<double> peak(num_dims_, 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    auto u = usage(i);
    for (std::size_t r = 0; r < num_dims_; ++r) {
      peak[r] = std::max(peak[r], u[r]);
    }
  }
  return peak;
}

bool WorkloadTrace::BoundedBy(const CapacityVector& capacity) const {
  if (capacity.size() != num_dims_) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    auto u = usage(i);
    for (std::size_t r = 0; r < num_dims_; ++r) {
      if (u[r] < 0.0 || u[r] > capacity[r]) return false;
    }
  }
  return true;
}

ResampledWorkload::ResampledWorkload(double bin_width_min,
                                     std::size_t num_dims)
    : bin_width_(bin_width_min), num_dims_(num_dims) {
  if (!(bin_width_ > 0.0)) {
    throw Error(ErrorCode::kConfig, "bin width must be positive");
  }
  if (num_dims_ == 0) {
    throw Error(ErrorCode::kConfig, "workload needs at least one dimension");
  }
}

ResampledWorkload ResampledWorkload::FromValues(std::span<const double> values,
                                                double bin_width_min) {
  ResampledWorkload w(bin_width_min, 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    w.Append(static_cast<std::int64_t>(i), values.subspan(i, 1));
  }
  return w;
}

void ResampledWorkload::Append(std::int64_t bin,
                               std::span<const double> values) {
  if (values.size() != num_dims_) {
    throw Error(ErrorCode::kInput, "bin vector has wrong dimension count");
  }
  if (!bins_.empty() && bin <= bins_.back()) {
    throw Error(ErrorCode::kInput, "bins must be strictly increasing");
  }
  for (double v : values) {
    if (!(v >= 0.0)) {
      throw Error(ErrorCode::kInput, "bin values must be non-negative");
    }
  }
  bins_.push_back(bin);
  values_.insert(values_.end(), values.begin(), values.end());
}

void ResampledWorkload::Scale(double factor) {
  for (double& v : values_) v *= factor;
}

void ResampledWorkload::ClampTo(const CapacityVector& capacity) {
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    for (std::size_t r = 0; r < num_dims_; ++r) {
      double& v = values_[i * num_dims_ + r];
      v = std::min(v, capacity[r]);
    }
  }
}

std::vector<double> ResampledWorkload::PeakUsage() const {
  std::vector<double> peak(num_dims_, 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t r = 0; r < num_dims_; ++r) {
      peak[r] = std::max(peak[r], value(i, r));
    }
  }
  return peak;
}

ResampledWorkload Resample(const WorkloadTrace& trace, double bin_width_min) {
  if (trace.empty()) {
    throw Error(ErrorCode::kEmptyTrace,
                "trace '" + trace.resource_id() + "' has no samples");
  }
  if (!(bin_width_min > 0.0)) {
    throw Error(ErrorCode::kConfig, "bin width must be positive");
  }
  const std::size_t dims = trace.num_dims();
  ResampledWorkload out(bin_width_min, dims);
  std::vector<double> current(dims, 0.0);
  std::int64_t current_bin = 0;
  bool open = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto bin = static_cast<std::int64_t>(
        std::floor(trace.timestamp(i) / bin_width_min));
    auto u = trace.usage(i);
    if (open && bin == current_bin) {
      for (std::size_t r = 0; r < dims; ++r) {
        current[r] = std::max(current[r], u[r]);
      }
      continue;
    }
    if (open) out.Append(current_bin, current);
    current.assign(u.begin(), u.end());
    current_bin = bin;
    open = true;
  }
  out.Append(current_bin, current);
  return out;
}

LogTransform::LogTransform(double base) : base_(base) {
  if (!(base > 0.0) || base == 1.0 || !std::isfinite(base)) {
    throw Error(ErrorCode::kDomain, "log base must be positive and != 1");
  }
  log_base_ = std::log(base);
}

double LogTransform::Forward(double value) const {
  if (!(value > 0.0)) {
    throw Error(ErrorCode::kDomain, "log transform needs a positive value");
  }
  if (base_ == 2.0) return std::log2(value);
  return std::log(value) / log_base_;
}

double LogTransform::Inverse(double transformed) const {
  if (base_ == 2.0) return std::exp2(transformed);
  return std::pow(base_, transformed);
}

double Discretize(double value, std::span<const double> candidates,
                  const LogTransform& transform) {
  if (candidates.empty()) {
    throw Error(ErrorCode::kConfig, "cannot discretize to an empty set");
  }
  if (!(value > 0.0)) {
    throw Error(ErrorCode::kDomain, "can only discretize positive values");
  }
  if (value <= candidates.front()) return candidates.front();
  if (value >= candidates.back()) return candidates.back();
  auto hi = std::lower_bound(candidates.begin(), candidates.end(), value);
  if (*hi == value) return value;
  auto lo = hi - 1;
  const double x = transform.Forward(value);
  const double below = x - transform.Forward(*lo);
  const double above = transform.Forward(*hi) - x;
  const double scale = std::max({1.0, std::abs(below), std::abs(above)});
  if (above - below <= kTieTolerance * scale) return *hi;
  return *lo;
}

double Discretize(double value, const CandidateSet& candidates,
                  const LogTransform& transform) {
  return Discretize(value, candidates.values(), transform);
}

SkuCatalog::SkuCatalog(std::vector<ResourceDim> dims) : dims_(std::move(dims)) {
  ValidateDims(dims_);
}

std::size_t SkuCatalog::DimIndex(std::string_view name) const {
  for (const auto& d : dims_) {
    if (d.name == name) return static_cast<std::size_t>(d.index);
  }
  throw Error(ErrorCode::kConfig,
              "unknown resource dimension '" + std::string(name) + "'");
}

void SkuCatalog::Set(const Offering& offering, std::size_t dim,
                     CandidateSet set) {
  if (dim >= dims_.size()) {
    throw Error(ErrorCode::kConfig, "catalog dimension out of range");
  }
  auto& per_dim = sets_[offering];
  per_dim.resize(dims_.size());
  per_dim[dim] = std::move(set);
}

bool SkuCatalog::Has(const Offering& offering) const {
  return sets_.contains(offering);
}

const CandidateSet& SkuCatalog::Get(const Offering& offering,
                                    std::size_t dim) const {
  auto it = sets_.find(offering);
  if (it == sets_.end() || dim >= it->second.size() || !it->second[dim]) {
    throw Error(ErrorCode::kConfig, "no candidates for offering '" +
                                        offering.Name() + "' dimension " +
                                        std::to_string(dim));
  }
  return *it->second[dim];
}

std::vector<Offering> SkuCatalog::Offerings() const {
  std::vector<Offering> out;
  for (const auto& [o, _] : sets_) out.push_back(o);
  return out;
}

}  // namespace skurec

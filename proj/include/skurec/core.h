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

#ifndef SKUREC_CORE_H_
#define SKUREC_CORE_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skurec {

enum class ErrorCode {
  kEmptyTrace,
  kDomain,
  kEmptyWorkload,
  kConfig,
  kNotFitted,
  kNoHierarchy,
  kEmptyDataset,
  kEmptyHistory,
  kInput,
  kLocked,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ResourceDim {
  int index = 0;
  std::string name;
};

// Checks that dims are indexed densely from 0 and names are unique.
void ValidateDims(std::span<const ResourceDim> dims);

// Server offering (stratification). The three standard offerings have
// canonical names; anything else is carried as a custom name.
class Offering {
 public:
  enum class Kind { kBurstable, kGeneralPurpose, kMemoryOptimized, kCustom };

  Offering() = default;
  explicit Offering(Kind kind);
  static Offering Custom(std::string name);
  static Offering Parse(std::string_view name);

  Kind kind() const { return kind_; }
  std::string Name() const;

  friend bool operator==(const Offering& a, const Offering& b) {
    return a.kind_ == b.kind_ && a.custom_ == b.custom_;
  }
  friend std::strong_ordering operator<=>(const Offering& a,
                                          const Offering& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    return a.custom_.compare(b.custom_) <=> 0;
  }

 private:
  Kind kind_ = Kind::kGeneralPurpose;
  std::string custom_;
};

// Sorted SKU options for one resource dimension of one offering.
class CandidateSet {
 public:
  CandidateSet(Offering offering, std::vector<double> values);

  const Offering& offering() const { return offering_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  bool Contains(double value) const;

 private:
  Offering offering_;
  std::vector<double> values_;
};

class CapacityVector {
 public:
  CapacityVector() = default;
  explicit CapacityVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t r) const { return values_[r]; }
  std::span<const double> values() const { return values_; }
  // Returns a copy with dimension r replaced.
  CapacityVector With(std::size_t r, double value) const;

  friend bool operator==(const CapacityVector&, const CapacityVector&) =
      default;

 private:
  std::vector<double> values_;
};

// Candidate sets per offering and resource dimension.
class SkuCatalog {
 public:
  SkuCatalog() = default;
  explicit SkuCatalog(std::vector<ResourceDim> dims);

  std::span<const ResourceDim> dims() const { return dims_; }
  // Index of a named dimension; throws ConfigError if unknown.
  std::size_t DimIndex(std::string_view name) const;

  void Set(const Offering& offering, std::size_t dim, CandidateSet set);
  bool Has(const Offering& offering) const;
  const CandidateSet& Get(const Offering& offering, std::size_t dim) const;
  std::vector<Offering> Offerings() const;

 private:
  std::vector<ResourceDim> dims_;
  std::map<Offering, std::vector<std::optional<CandidateSet>>> sets_;
};

// Raw, irregularly sampled utilization. Samples are stored row-major:
// usage(i) is a view of num_dims() values.
class WorkloadTrace {
 public:
  WorkloadTrace() = default;
  WorkloadTrace(std::string resource_id, std::size_t num_dims);

  const std::string& resource_id() const { return resource_id_; }
  std::size_t num_dims() const { return num_dims_; }
  std::size_t size() const { return timestamps_.size(); }
  bool empty() const { return timestamps_.empty(); }

  double timestamp(std::size_t i) const { return timestamps_[i]; }
  std::span<const double> usage(std::size_t i) const {
    return {values_.data() + i * num_dims_, num_dims_};
  }
  std::span<double> mutable_usage(std::size_t i) {
    return {values_.data() + i * num_dims_, num_dims_};
  }

  // Timestamps must be non-decreasing; usage must be non-negative.
  void Append(double timestamp_min, std::span<const double> usage);

  // Per-dimension maximum over all samples.
  std::vector<double> PeakUsage() const;

  // Checks 0 <= u_r(t) <= c_r for every sample.
  bool BoundedBy(const CapacityVector& capacity) const;

 private:
  std::string resource_id_;
  std::size_t num_dims_ = 0;
  std::vector<double> timestamps_;
  std::vector<double> values_;
};

// Regular signal w[n] obtained by max-aggregating a trace into fixed bins.
// Bins with no raw samples are absent.
class ResampledWorkload {
 public:
  ResampledWorkload() = default;
  ResampledWorkload(double bin_width_min, std::size_t num_dims);

  // Builds a single-dimension workload with consecutive bins 0..n-1.
  static ResampledWorkload FromValues(std::span<const double> values,
                                      double bin_width_min = 5.0);

  double bin_width() const { return bin_width_; }
  std::size_t num_dims() const { return num_dims_; }
  std::size_t size() const { return bins_.size(); }
  bool empty() const { return bins_.empty(); }

  std::int64_t bin(std::size_t i) const { return bins_[i]; }
  std::span<const double> values(std::size_t i) const {
    return {values_.data() + i * num_dims_, num_dims_};
  }
  double value(std::size_t i, std::size_t r) const {
    return values_[i * num_dims_ + r];
  }

  // Bins must be strictly increasing.
  void Append(std::int64_t bin, std::span<const double> values);
  void Scale(double factor);
  void ClampTo(const CapacityVector& capacity);

  std::vector<double> PeakUsage() const;

 private:
  double bin_width_ = 5.0;
  std::size_t num_dims_ = 0;
  std::vector<std::int64_t> bins_;
  std::vector<double> values_;
};

// w[n] = max{u(t) : n <= t/T < n+1}; empty bins are dropped.
ResampledWorkload Resample(const WorkloadTrace& trace, double bin_width_min);

// Log-space transform used for fitting and personalization.
class LogTransform {
 public:
  explicit LogTransform(double base = 2.0);

  double base() const { return base_; }
  double Forward(double value) const;
  double Inverse(double transformed) const;

 private:
  double base_;
  double log_base_;
};

// Nearest candidate in log space. Exact midpoints round up; values outside
// the candidate range clamp to its ends.
double Discretize(double value, std::span<const double> candidates,
                  const LogTransform& transform = LogTransform());
double Discretize(double value, const CandidateSet& candidates,
                  const LogTransform& transform = LogTransform());

}  // namespace skurec

#endif  // SKUREC_CORE_H_

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

#ifndef SKUREC_PROVISIONERS_H_
#define SKUREC_PROVISIONERS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "skurec/core.h"
#include "skurec/forest.h"
#include "skurec/hierarchy.h"

namespace skurec {

// A training row: profile plus its rightsized capacity (raw units).
struct LabeledProfile {
  ProfileRecord profile;
  double label = 0.0;
};

// Nearest-rank percentile of an ascending sample: the element at 1-based
// rank floor(p/100 * n) + 1, clamped to [1, n]. p must lie in [0, 100].
double NearestRankPercentile(std::span<const double> sorted, double p);

// Stage-2 output for one profile, before personalization.
struct ProvisionerPrediction {
  double capacity = 0.0;  // discretized to the offering's candidates
  double raw = 0.0;       // undiscretized model output (raw units)
  bool default_fallback = false;
  // Explanation: which hierarchy level answered and how many samples backed
  // it. Empty for the target-encoding provisioner.
  std::string matched_level;
  std::string matched_value;
  std::size_t support = 0;
};

struct HierarchicalConfig {
  std::size_t min_bucket_size = 10;
  double percentile = 50.0;
  double log_base = 2.0;
};

// Per-level buckets of rightsized capacities for one offering, stored in log
// space and sorted. Levels follow the hierarchy chain from coarse to fine.
class BucketIndex {
 public:
  struct Level {
    std::size_t feature = 0;
    std::string feature_name;
    std::map<std::string, std::vector<double>> buckets;
  };

  BucketIndex() = default;

  bool fitted() const { return fitted_; }
  const HierarchicalConfig& config() const { return config_; }
  std::span<const Level> levels() const { return levels_; }
  std::size_t training_size() const { return training_size_; }

  // Bucket of `value` at chain level j, or nullptr.
  const std::vector<double>* Bucket(std::size_t j,
                                    const std::string& value) const;

 private:
  friend BucketIndex FitHierarchical(std::span<const LabeledProfile>,
                                     const HierarchyModel&,
                                     const HierarchicalConfig&);
  bool fitted_ = false;
  HierarchicalConfig config_;
  std::vector<Level> levels_;
  std::size_t training_size_ = 0;
};

// Groups labels by feature value at every level of the chain. Each level is
// indexed on its own feature only.
BucketIndex FitHierarchical(std::span<const LabeledProfile> train,
                            const HierarchyModel& model,
                            const HierarchicalConfig& config);

// Scans from the most granular level up and answers from the first bucket
// with at least N members. MISSING values never match a bucket. Falls back to
// min(candidates) with default_fallback set when no level qualifies.
ProvisionerPrediction PredictHierarchical(const ProfileRecord& x,
                                          const BucketIndex& index,
                                          const CandidateSet& candidates);

enum class Aggregator { kMean, kPercentile };

struct TargetEncodingConfig {
  Aggregator aggregator = Aggregator::kMean;
  double aggregator_percentile = 50.0;
  ForestConfig forest;
  double log_base = 2.0;
  // Features with a distinct value in every training row encode to the
  // global mean.
  bool skip_identifier_features = true;
};

struct EncodedDataset;

// Maps each categorical value to an aggregate of the log-space labels of the
// rows sharing it. MISSING and unseen values map to the global mean.
class TargetEncoder {
 public:
  TargetEncoder() = default;

  bool fitted() const { return fitted_; }
  std::size_t num_features() const { return maps_.size(); }
  double global_mean() const { return global_mean_; }
  // Encoding of `value` for feature h.
  double Encode(std::size_t h, const std::string& value) const;
  std::vector<double> Encode(const ProfileRecord& x) const;

  nlohmann::json ToJson() const;
  static TargetEncoder FromJson(const nlohmann::json& j);

 private:
  friend EncodedDataset EncodeTrainingSet(std::span<const LabeledProfile>,
                                          std::size_t,
                                          const TargetEncodingConfig&);
  bool fitted_ = false;
  std::vector<std::map<std::string, double>> maps_;
  double global_mean_ = 0.0;
};

struct EncodedDataset {
  TargetEncoder encoder;
  FeatureMatrix features;
  std::vector<double> labels;  // log-space
};

EncodedDataset EncodeTrainingSet(std::span<const LabeledProfile> train,
                                 std::size_t num_features,
                                 const TargetEncodingConfig& config);

// Target encoder plus the regression forest trained on the encoded rows.
class TargetEncodingModel {
 public:
  TargetEncodingModel() = default;

  bool fitted() const { return encoder_.fitted(); }
  const TargetEncoder& encoder() const { return encoder_; }
  const RegressionForest& forest() const { return forest_; }
  double log_base() const { return log_base_; }

  // Log-space prediction.
  double PredictTransformed(const ProfileRecord& x) const;

  nlohmann::json ToJson() const;
  static TargetEncodingModel FromJson(const nlohmann::json& j);

 private:
  friend TargetEncodingModel FitTargetEncoding(std::span<const LabeledProfile>,
                                               std::size_t,
                                               const TargetEncodingConfig&);
  TargetEncoder encoder_;
  RegressionForest forest_;
  double log_base_ = 2.0;
};

TargetEncodingModel FitTargetEncoding(std::span<const LabeledProfile> train,
                                      std::size_t num_features,
                                      const TargetEncodingConfig& config);

ProvisionerPrediction PredictTargetEncoding(const ProfileRecord& x,
                                            const TargetEncodingModel& model,
                                            const CandidateSet& candidates);

// One row of the exported prediction store, keyed by
// [offering, hierarchy level, feature value].
struct PredictionStoreRow {
  std::string offering;
  std::string level;
  std::string value;
  double capacity = 0.0;
  std::size_t support = 0;
};

class PredictionStore {
 public:
  PredictionStore() = default;
  explicit PredictionStore(std::vector<PredictionStoreRow> rows);

  std::span<const PredictionStoreRow> rows() const { return rows_; }
  // `levels` holds (feature name, value) pairs of the query from coarse to
  // fine. Returns the most granular level present in the store.
  std::optional<PredictionStoreRow> Lookup(
      const std::string& offering,
      std::span<const std::pair<std::string, std::string>> levels) const;
  bool Erase(const std::string& offering, const std::string& level,
             const std::string& value);

  void Save(const std::filesystem::path& path) const;
  static PredictionStore Load(const std::filesystem::path& path);

 private:
  std::vector<PredictionStoreRow> rows_;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t>
      index_;
};

// Stratified wrappers: one model per offering, each trained only on rows of
// that offering. Offerings with too few rows answer with the default.
class HierarchicalProvisioner {
 public:
  static HierarchicalProvisioner Fit(std::span<const LabeledProfile> train,
                                     const HierarchyModel& model,
                                     const SkuCatalog& catalog,
                                     std::size_t dim,
                                     const HierarchicalConfig& config,
                                     std::size_t min_offering_rows = 10);

  // Throws ConfigError for an offering absent from the catalog.
  ProvisionerPrediction Predict(const ProfileRecord& x) const;
  const BucketIndex* Index(const Offering& offering) const;
  std::vector<Offering> DefaultOnlyOfferings() const;
  // Every bucket with at least N members, per offering.
  PredictionStore ExportStore() const;

 private:
  struct Stratum {
    CandidateSet candidates;
    BucketIndex index;
  };
  std::map<Offering, Stratum> strata_;
};

class TargetEncodingProvisioner {
 public:
  static TargetEncodingProvisioner Fit(std::span<const LabeledProfile> train,
                                       std::size_t num_features,
                                       const SkuCatalog& catalog,
                                       std::size_t dim,
                                       const TargetEncodingConfig& config,
                                       std::size_t min_offering_rows = 10);

  ProvisionerPrediction Predict(const ProfileRecord& x) const;
  std::vector<Offering> DefaultOnlyOfferings() const;

  nlohmann::json ToJson() const;
  static TargetEncodingProvisioner FromJson(const nlohmann::json& j);

 private:
  struct Stratum {
    CandidateSet candidates;
    TargetEncodingModel model;
  };
  std::map<Offering, Stratum> strata_;
};

}  // namespace skurec

#endif  // SKUREC_PROVISIONERS_H_

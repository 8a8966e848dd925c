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

#include "skurec/provisioners.h"

#include <algorithm>
#include <cmath>

#include "skurec/csv.h"

namespace skurec {

namespace {

std::map<Offering, std::vector<LabeledProfile>> GroupByOffering(
    std::span<const LabeledProfile> rows) {
  std::map<Offering, std::vector<LabeledProfile>> out;
  for (const auto& row : rows) out[row.profile.offering].push_back(row);
  return out;
}

void RequireLabelsPositive(std::span<const LabeledProfile> rows) {
  for (const auto& row : rows) {
    if (!(row.label > 0.0)) {
      throw Error(ErrorCode::kInput, "training labels must be positive");
    }
  }
}

ProvisionerPrediction DefaultPrediction(const CandidateSet& candidates) {
  ProvisionerPrediction out;
  out.capacity = candidates.min();
  out.raw = candidates.min();
  out.default_fallback = true;
  return out;
}

}  // namespace

double NearestRankPercentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "percentile of an empty sample");
  }
  if (!(p >= 0.0 && p <= 100.0)) {
    throw Error(ErrorCode::kConfig, "percentile must be in [0, 100]");
  }
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::floor(p / 100.0 * n)) + 1;
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

const std::vector<double>* BucketIndex::Bucket(std::size_t j,
                                               const std::string& value) const {
  if (j >= levels_.size()) return nullptr;
  auto it = levels_[j].buckets.find(value);
  return it == levels_[j].buckets.end() ? nullptr : &it->second;
}

BucketIndex FitHierarchical(std::span<const LabeledProfile> train,
                            const HierarchyModel& model,
                            const HierarchicalConfig& config) {
  if (train.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no training rows");
  }
  if (config.min_bucket_size == 0) {
    throw Error(ErrorCode::kConfig, "minimum bucket size must be positive");
  }
  if (!(config.percentile > 0.0 && config.percentile < 100.0)) {
    throw Error(ErrorCode::kConfig, "bucket percentile must be in (0, 100)");
  }
  RequireLabelsPositive(train);
  const LogTransform xi(config.log_base);
  BucketIndex index;
  index.config_ = config;
  index.training_size_ = train.size();
  for (std::size_t feature : model.chain) {
    BucketIndex::Level level;
    level.feature = feature;
    level.feature_name = model.feature_names.at(feature);
    for (const auto& row : train) {
      if (feature >= row.profile.values.size()) {
        throw Error(ErrorCode::kInput, "profile shorter than hierarchy schema");
      }
      level.buckets[row.profile.values[feature]].push_back(
          xi.Forward(row.label));
    }
    for (auto& [_, bucket] : level.buckets) {
      std::sort(bucket.begin(), bucket.end());
    }
    index.levels_.push_back(std::move(level));
  }
  index.fitted_ = true;
  return index;
}

ProvisionerPrediction PredictHierarchical(const ProfileRecord& x,
                                          const BucketIndex& index,
                                          const CandidateSet& candidates) {
  if (!index.fitted()) {
    throw Error(ErrorCode::kNotFitted, "bucket index not fitted");
  }
  const LogTransform xi(index.config().log_base);
  const auto levels = index.levels();
  for (std::size_t j = levels.size(); j-- > 0;) {
    const auto& level = levels[j];
    if (level.feature >= x.values.size()) continue;
    const std::string& value = x.values[level.feature];
    if (value == kMissing) continue;
    const auto* bucket = index.Bucket(j, value);
    if (bucket == nullptr || bucket->size() < index.config().min_bucket_size) {
      continue;
    }
    ProvisionerPrediction out;
    out.raw = xi.Inverse(NearestRankPercentile(*bucket,
                                               index.config().percentile));
    out.capacity = Discretize(out.raw, candidates, xi);
    out.matched_level = level.feature_name;
    out.matched_value = value;
    out.support = bucket->size();
    return out;
  }
  return DefaultPrediction(candidates);
}

double TargetEncoder::Encode(std::size_t h, const std::string& value) const {
  if (!fitted_) throw Error(ErrorCode::kNotFitted, "target encoder not fitted");
  if (h >= maps_.size() || value == kMissing) return global_mean_;
  auto it = maps_[h].find(value);
  return it == maps_[h].end() ? global_mean_ : it->second;
}

std::vector<double> TargetEncoder::Encode(const ProfileRecord& x) const {
  std::vector<double> out(maps_.size());
  for (std::size_t h = 0; h < maps_.size(); ++h) {
    out[h] = h < x.values.size() ? Encode(h, x.values[h]) : global_mean_;
  }
  return out;
}

nlohmann::json TargetEncoder::ToJson() const {
  return {{"global_mean", global_mean_}, {"maps", maps_}};
}

TargetEncoder TargetEncoder::FromJson(const nlohmann::json& j) {
  TargetEncoder encoder;
  encoder.global_mean_ = j.at("global_mean").get<double>();
  encoder.maps_ =
      j.at("maps").get<std::vector<std::map<std::string, double>>>();
  encoder.fitted_ = true;
  return encoder;
}

EncodedDataset EncodeTrainingSet(std::span<const LabeledProfile> train,
                                 std::size_t num_features,
                                 const TargetEncodingConfig& config) {
  if (train.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no training rows");
  }
  RequireLabelsPositive(train);
  const LogTransform xi(config.log_base);
  EncodedDataset out;
  out.labels.reserve(train.size());
  double sum = 0.0;
  for (const auto& row : train) {
    out.labels.push_back(xi.Forward(row.label));
    sum += out.labels.back();
  }
  TargetEncoder& encoder = out.encoder;
  encoder.global_mean_ = sum / static_cast<double>(train.size());
  encoder.maps_.resize(num_features);
  for (std::size_t h = 0; h < num_features; ++h) {
    std::map<std::string, std::vector<double>> groups;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto& values = train[i].profile.values;
      if (h >= values.size()) {
        throw Error(ErrorCode::kInput, "profile shorter than schema");
      }
      if (values[h] == kMissing) continue;
      groups[values[h]].push_back(out.labels[i]);
    }
    // A feature whose training values are all distinct only restates the
    // label and is unseen for any new resource.
    if (config.skip_identifier_features && groups.size() > 1 &&
        std::all_of(groups.begin(), groups.end(),
                    [](const auto& g) { return g.second.size() == 1; })) {
      continue;
    }
    for (auto& [value, labels] : groups) {
      double encoded = 0.0;
      if (config.aggregator == Aggregator::kMean) {
        double s = 0.0;
        for (double y : labels) s += y;
        encoded = s / static_cast<double>(labels.size());
      } else {
        std::sort(labels.begin(), labels.end());
        encoded = NearestRankPercentile(labels, config.aggregator_percentile);
      }
      encoder.maps_[h].emplace(value, encoded);
    }
  }
  encoder.fitted_ = true;

  out.features = FeatureMatrix(num_features);
  for (const auto& row : train) out.features.AppendRow(encoder.Encode(row.profile));
  return out;
}

double TargetEncodingModel::PredictTransformed(const ProfileRecord& x) const {
  if (!fitted()) {
    throw Error(ErrorCode::kNotFitted, "target encoding model not fitted");
  }
  // Without features there is nothing to split on; answer the global mean.
  if (encoder_.num_features() == 0) return encoder_.global_mean();
  return forest_.Predict(encoder_.Encode(x));
}

nlohmann::json TargetEncodingModel::ToJson() const {
  return {{"log_base", log_base_},
          {"encoder", encoder_.ToJson()},
          {"forest", forest_.ToJson()}};
}

TargetEncodingModel TargetEncodingModel::FromJson(const nlohmann::json& j) {
  try {
    TargetEncodingModel model;
    model.log_base_ = j.at("log_base").get<double>();
    model.encoder_ = TargetEncoder::FromJson(j.at("encoder"));
    model.forest_ = RegressionForest::FromJson(j.at("forest"));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput,
                std::string("malformed target encoding model: ") + e.what());
  }
}

TargetEncodingModel FitTargetEncoding(std::span<const LabeledProfile> train,
                                      std::size_t num_features,
                                      const TargetEncodingConfig& config) {
  EncodedDataset encoded = EncodeTrainingSet(train, num_features, config);
  TargetEncodingModel model;
  model.log_base_ = config.log_base;
  if (num_features > 0) {
    model.forest_ = RegressionForest(config.forest);
    model.forest_.Fit(encoded.features, encoded.labels);
  }
  model.encoder_ = std::move(encoded.encoder);
  return model;
}

ProvisionerPrediction PredictTargetEncoding(const ProfileRecord& x,
                                            const TargetEncodingModel& model,
                                            const CandidateSet& candidates) {
  const LogTransform xi(model.log_base());
  ProvisionerPrediction out;
  out.raw = xi.Inverse(model.PredictTransformed(x));
  out.capacity = Discretize(out.raw, candidates, xi);
  return out;
}

PredictionStore::PredictionStore(std::vector<PredictionStoreRow> rows)
    : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    if (!index_.emplace(std::make_tuple(row.offering, row.level, row.value), i)
             .second) {
      throw Error(ErrorCode::kInput, "duplicate prediction store key " +
                                         row.offering + "/" + row.level + "/" +
                                         row.value);
    }
  }
}

std::optional<PredictionStoreRow> PredictionStore::Lookup(
    const std::string& offering,
    std::span<const std::pair<std::string, std::string>> levels) const {
  for (std::size_t j = levels.size(); j-- > 0;) {
    const auto& [level, value] = levels[j];
    if (value == kMissing) continue;
    auto it = index_.find(std::make_tuple(offering, level, value));
    if (it != index_.end()) return rows_[it->second];
  }
  return std::nullopt;
}

bool PredictionStore::Erase(const std::string& offering,
                            const std::string& level,
                            const std::string& value) {
  auto it = index_.find(std::make_tuple(offering, level, value));
  if (it == index_.end()) return false;
  rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(it->second));
  *this = PredictionStore(std::move(rows_));
  return true;
}

void PredictionStore::Save(const std::filesystem::path& path) const {
  csv::Writer out(path);
  out.Row({"offering", "hierarchy_level", "feature_value",
           "recommended_capacity", "support_count"});
  for (const auto& row : rows_) {
    out.Row({row.offering, row.level, row.value,
             csv::FormatNumber(row.capacity), std::to_string(row.support)});
  }
  out.Close();
}

PredictionStore PredictionStore::Load(const std::filesystem::path& path) {
  csv::Reader in(path);
  const std::size_t offering = in.Column("offering");
  const std::size_t level = in.Column("hierarchy_level");
  const std::size_t value = in.Column("feature_value");
  const std::size_t capacity = in.Column("recommended_capacity");
  const std::size_t support = in.Column("support_count");
  std::vector<PredictionStoreRow> rows;
  std::vector<std::string> f;
  while (in.Next(f)) {
    if (f.size() != in.header().size()) {
      throw Error(ErrorCode::kInput, path.string() + ":" +
                                         std::to_string(in.line_number()) +
                                         ": wrong field count");
    }
    rows.push_back(PredictionStoreRow{
        f[offering], f[level], f[value], csv::ParseNumber(f[capacity]),
        static_cast<std::size_t>(csv::ParseInteger(f[support]))});
  }
  return PredictionStore(std::move(rows));
}

HierarchicalProvisioner HierarchicalProvisioner::Fit(
    std::span<const LabeledProfile> train, const HierarchyModel& model,
    const SkuCatalog& catalog, std::size_t dim,
    const HierarchicalConfig& config, std::size_t min_offering_rows) {
  if (train.empty()) throw Error(ErrorCode::kEmptyDataset, "no training rows");
  auto groups = GroupByOffering(train);
  HierarchicalProvisioner out;
  for (const Offering& offering : catalog.Offerings()) {
    Stratum stratum{catalog.Get(offering, dim), BucketIndex()};
    auto it = groups.find(offering);
    if (it != groups.end() && it->second.size() >= min_offering_rows) {
      stratum.index = FitHierarchical(it->second, model, config);
    }
    out.strata_.emplace(offering, std::move(stratum));
  }
  return out;
}

ProvisionerPrediction HierarchicalProvisioner::Predict(
    const ProfileRecord& x) const {
  auto it = strata_.find(x.offering);
  if (it == strata_.end()) {
    throw Error(ErrorCode::kConfig,
                "unknown offering '" + x.offering.Name() + "'");
  }
  if (!it->second.index.fitted()) {
    return DefaultPrediction(it->second.candidates);
  }
  return PredictHierarchical(x, it->second.index, it->second.candidates);
}

const BucketIndex* HierarchicalProvisioner::Index(
    const Offering& offering) const {
  auto it = strata_.find(offering);
  return it == strata_.end() ? nullptr : &it->second.index;
}

std::vector<Offering> HierarchicalProvisioner::DefaultOnlyOfferings() const {
  std::vector<Offering> out;
  for (const auto& [offering, stratum] : strata_) {
    if (!stratum.index.fitted()) out.push_back(offering);
  }
  return out;
}

PredictionStore HierarchicalProvisioner::ExportStore() const {
  std::vector<PredictionStoreRow> rows;
  for (const auto& [offering, stratum] : strata_) {
    const BucketIndex& index = stratum.index;
    if (!index.fitted()) continue;
    const LogTransform xi(index.config().log_base);
    for (const auto& level : index.levels()) {
      for (const auto& [value, bucket] : level.buckets) {
        if (value == kMissing || bucket.size() < index.config().min_bucket_size) {
          continue;
        }
        const double raw =
            xi.Inverse(NearestRankPercentile(bucket, index.config().percentile));
        rows.push_back(PredictionStoreRow{
            offering.Name(), level.feature_name, value,
            Discretize(raw, stratum.candidates, xi), bucket.size()});
      }
    }
  }
  return PredictionStore(std::move(rows));
}

TargetEncodingProvisioner TargetEncodingProvisioner::Fit(
    std::span<const LabeledProfile> train, std::size_t num_features,
    const SkuCatalog& catalog, std::size_t dim,
    const TargetEncodingConfig& config, std::size_t min_offering_rows) {
  if (train.empty()) throw Error(ErrorCode::kEmptyDataset, "no training rows");
  auto groups = GroupByOffering(train);
  TargetEncodingProvisioner out;
  for (const Offering& offering : catalog.Offerings()) {
    Stratum stratum{catalog.Get(offering, dim), TargetEncodingModel()};
    auto it = groups.find(offering);
    if (it != groups.end() && it->second.size() >= min_offering_rows) {
      stratum.model = FitTargetEncoding(it->second, num_features, config);
    }
    out.strata_.emplace(offering, std::move(stratum));
  }
  return out;
}

ProvisionerPrediction TargetEncodingProvisioner::Predict(
    const ProfileRecord& x) const {
  auto it = strata_.find(x.offering);
  if (it == strata_.end()) {
    throw Error(ErrorCode::kConfig,
                "unknown offering '" + x.offering.Name() + "'");
  }
  if (!it->second.model.fitted()) {
    return DefaultPrediction(it->second.candidates);
  }
  return PredictTargetEncoding(x, it->second.model, it->second.candidates);
}

std::vector<Offering> TargetEncodingProvisioner::DefaultOnlyOfferings() const {
  std::vector<Offering> out;
  for (const auto& [offering, stratum] : strata_) {
    if (!stratum.model.fitted()) out.push_back(offering);
  }
  return out;
}

nlohmann::json TargetEncodingProvisioner::ToJson() const {
  nlohmann::json strata = nlohmann::json::array();
  for (const auto& [offering, stratum] : strata_) {
    nlohmann::json s = {
        {"offering", offering.Name()},
        {"candidates", std::vector<double>(stratum.candidates.values().begin(),
                                           stratum.candidates.values().end())}};
    if (stratum.model.fitted()) s["model"] = stratum.model.ToJson();
    strata.push_back(std::move(s));
  }
  return {{"version", 1}, {"strata", std::move(strata)}};
}

TargetEncodingProvisioner TargetEncodingProvisioner::FromJson(
    const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kInput, "unsupported target encoding version");
    }
    TargetEncodingProvisioner out;
    for (const auto& s : j.at("strata")) {
      Offering offering = Offering::Parse(s.at("offering").get<std::string>());
      Stratum stratum{
          CandidateSet(offering, s.at("candidates").get<std::vector<double>>()),
          TargetEncodingModel()};
      if (s.contains("model")) {
        stratum.model = TargetEncodingModel::FromJson(s.at("model"));
      }
      out.strata_.emplace(offering, std::move(stratum));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput,
                std::string("malformed target encoding provisioner: ") +
                    e.what());
  }
}

}  // namespace skurec

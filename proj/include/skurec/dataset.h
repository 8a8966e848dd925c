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

#ifndef SKUREC_DATASET_H_
#define SKUREC_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "skurec/core.h"
#include "skurec/hierarchy.h"

namespace skurec {

// Resources with their profiles, raw telemetry and user-selected capacities,
// all aligned by position.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::string> resource_ids;
  std::vector<ProfileRecord> profiles;
  std::vector<WorkloadTrace> traces;
  std::vector<CapacityVector> user_capacity;
  SkuCatalog catalog;

  std::size_t size() const { return resource_ids.size(); }
  // Position of a resource id; throws InputError when unknown.
  std::size_t IndexOf(const std::string& resource_id) const;
  void RebuildIndex();

 private:
  std::map<std::string, std::size_t> index_;
};

// Counters for a tolerant CSV load: bad rows are skipped and reported.
struct LoadReport {
  std::size_t rows = 0;
  std::size_t skipped = 0;
  std::vector<std::string> messages;  // "file:line: reason"

  double SkippedFraction() const {
    return rows == 0 ? 0.0 : static_cast<double>(skipped) / rows;
  }
};

// catalog.csv: offering,dimension,candidates with candidates '|'-separated.
// Dimensions are indexed in order of first appearance.
void WriteCatalog(const std::filesystem::path& path, const SkuCatalog& catalog);
SkuCatalog ReadCatalog(const std::filesystem::path& path);

// telemetry.csv: resource_id,timestamp_min,dimension,value. One row per
// sample and dimension.
void WriteTelemetry(const std::filesystem::path& path,
                    std::span<const WorkloadTrace> traces,
                    std::span<const ResourceDim> dims);
std::map<std::string, WorkloadTrace> ReadTelemetry(
    const std::filesystem::path& path, std::span<const ResourceDim> dims,
    LoadReport* report);

// profiles.csv: resource_id,offering,<feature columns>. Empty values are read
// as MISSING.
void WriteProfiles(const std::filesystem::path& path,
                   std::span<const std::string> feature_names,
                   std::span<const std::string> resource_ids,
                   std::span<const ProfileRecord> profiles);
struct ProfileTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> resource_ids;
  std::vector<ProfileRecord> profiles;
};
ProfileTable ReadProfiles(const std::filesystem::path& path);

// capacities.csv: resource_id,dimension,user_capacity.
void WriteCapacities(const std::filesystem::path& path,
                     std::span<const std::string> resource_ids,
                     std::span<const CapacityVector> capacities,
                     std::span<const ResourceDim> dims);
std::map<std::string, CapacityVector> ReadCapacities(
    const std::filesystem::path& path, std::span<const ResourceDim> dims,
    LoadReport* report);

}  // namespace skurec

#endif  // SKUREC_DATASET_H_

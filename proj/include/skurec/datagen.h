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

#ifndef SKUREC_DATAGEN_H_
#define SKUREC_DATAGEN_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "skurec/core.h"
#include "skurec/dataset.h"
#include "skurec/hierarchy.h"

namespace skurec {

// Single-dimension (vCores) catalog with the standard three offerings.
SkuCatalog DefaultCatalog();

// Feature schema of generated profiles, coarse to fine, followed by one
// feature that is unrelated to the hierarchy.
std::vector<std::string> SyntheticFeatureNames();

struct SyntheticSpec {
  std::size_t customers = 125;
  std::size_t subscriptions_per_customer = 2;
  std::size_t groups_per_subscription = 4;
  std::size_t resources_per_group = 5;
  std::size_t segments = 3;
  std::size_t industries = 8;
  std::size_t verticals = 20;
  std::size_t server_versions = 4;

  double duration_hours = 12.0;
  double sample_interval_min = 2.5;

  // log2 of the demand level is the sum of a global mean and independent
  // normal effects per vertical, customer, resource group and resource.
  double mean_log2_demand = -0.8;
  double vertical_sd = 0.5;
  double customer_sd = 0.4;
  double group_sd = 0.4;
  double resource_sd = 0.15;
  // Multiplies every demand level; 0 yields idle workloads.
  double demand_scale = 1.0;

  double diurnal_amplitude = 0.3;
  double noise_sd = 0.1;
  double spike_probability = 0.005;
  double spike_factor = 1.5;

  // Share of users picking the smallest candidate of their offering.
  double min_choice_share = 0.63;
  // Burstable, GeneralPurpose, MemoryOptimized.
  std::vector<double> offering_shares = {0.3, 0.5, 0.2};

  std::uint64_t seed = 0;

  nlohmann::json ToJson() const;
  static SyntheticSpec FromJson(const nlohmann::json& j);
};

// Generates profiles, raw traces clamped at the user capacity, and the user
// capacities themselves. Deterministic in the seed.
Dataset GenerateSynthetic(const SyntheticSpec& spec,
                          const SkuCatalog& catalog = DefaultCatalog());

struct UpscaleSpec {
  std::vector<std::pair<std::string, double>> factors = {
      {"ResourceGroup", 1.0}, {"CloudCustomerGuid", 1.0}, {"VerticalName", 3.0}};
  std::uint64_t seed = 0;

  nlohmann::json ToJson() const;
  static UpscaleSpec FromJson(const nlohmann::json& j);
};

// Factor drawn for one feature value: `factor` or 0 with equal odds, from a
// seeded hash of the feature name and value.
double AssignedFactor(std::string_view feature, std::string_view value,
                      double factor, std::uint64_t seed);

// Multiplies each trace by 2^chi, where chi sums the factors assigned to the
// resource's values of the selected features, scales the user capacity by
// the same amount, discretizes it and re-clamps the trace to it. Returns chi
// per resource. Throws ConfigError for a feature absent from the schema.
std::vector<double> Upscale(Dataset& dataset, const UpscaleSpec& spec);

// Strict hierarchy of categorical features plus independent noise features,
// for checking hierarchy recovery.
struct StrictHierarchySpec {
  // Cardinalities of the chained features from coarse to fine.
  std::vector<std::size_t> chain = {3, 9, 27, 81};
  std::vector<std::size_t> noise = {4, 8};
  std::size_t rows = 600;
  std::uint64_t seed = 0;
};

struct StrictHierarchySample {
  CategoricalTable table;
  // Ground-truth chain as feature indices, coarse to fine.
  std::vector<std::size_t> chain;
};

// Columns are shuffled so the chain order is not the schema order.
StrictHierarchySample GenerateStrictHierarchy(const StrictHierarchySpec& spec);

}  // namespace skurec

#endif  // SKUREC_DATAGEN_H_

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

#ifndef SKUREC_HIERARCHY_H_
#define SKUREC_HIERARCHY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "skurec/core.h"

namespace skurec {

// Token for an absent profile value. It takes part in entropy like any other
// category.
inline constexpr std::string_view kMissing = "MISSING";

// Categorical profile of one resource: customer-level then server-level
// feature values, plus the offering it is stratified by.
struct ProfileRecord {
  std::vector<std::string> values;
  Offering offering;
};

// Column-major integer-coded view of a set of profiles.
class CategoricalTable {
 public:
  explicit CategoricalTable(std::vector<std::string> feature_names);
  static CategoricalTable FromProfiles(std::vector<std::string> feature_names,
                                       std::span<const ProfileRecord> rows);

  void AddRow(std::span<const std::string> values);

  std::size_t num_rows() const { return num_rows_; }
  std::size_t num_features() const { return names_.size(); }
  const std::string& name(std::size_t m) const { return names_[m]; }
  std::span<const std::string> names() const { return names_; }
  std::span<const std::int32_t> column(std::size_t m) const {
    return columns_[m];
  }
  std::size_t cardinality(std::size_t m) const {
    return dictionaries_[m].size();
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::int32_t>> columns_;
  std::vector<std::unordered_map<std::string, std::int32_t>> dictionaries_;
  std::size_t num_rows_ = 0;
};

// Entropies in bits over the empirical distribution of the table.
double Entropy(const CategoricalTable& table, std::size_t m);
double JointEntropy(const CategoricalTable& table, std::size_t m1,
                    std::size_t m2);
// H(m1 | m2).
double ConditionalEntropy(const CategoricalTable& table, std::size_t m1,
                          std::size_t m2);

struct UncertaintyReductionResult {
  double value = 0.0;
  // Set when m1 is constant (H(m1) = 0); value is then 0.
  bool degenerate = false;
};

// UR(m1 | m2) = 1 - H(m1 | m2) / H(m1).
UncertaintyReductionResult UncertaintyReduction(const CategoricalTable& table,
                                                std::size_t m1,
                                                std::size_t m2);

struct HierarchyModel {
  static constexpr int kVersion = 1;

  std::vector<std::string> feature_names;
  // Feature indices from the coarsest (root) to the most granular.
  std::vector<std::size_t> chain;
  // intensity[fine][coarse] = UR(coarse | fine) for retained edges, else 0.
  std::vector<std::vector<double>> intensity;
  std::vector<double> entropy;
  double threshold = 0.6;
  // True when no hierarchy was found and the chain is the schema order.
  bool schema_fallback = false;

  std::vector<std::string> ChainNames() const;
  // Out-degree of each feature in the coarse -> fine graph.
  std::vector<std::size_t> OutDegrees() const;

  nlohmann::json ToJson() const;
  static HierarchyModel FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  static HierarchyModel Load(const std::filesystem::path& path);
};

// Learns the chain of features from coarse to fine. Throws NoHierarchy if no
// pair of features passes the threshold.
HierarchyModel LearnHierarchy(const CategoricalTable& table,
                              double threshold = 0.6);

// LearnHierarchy, falling back to the schema order when no edge survives.
HierarchyModel LearnHierarchyOrSchema(const CategoricalTable& table,
                                      double threshold = 0.6);

}  // namespace skurec

#endif  // SKUREC_HIERARCHY_H_

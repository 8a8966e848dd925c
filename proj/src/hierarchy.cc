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

#include "skurec/hierarchy.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

namespace skurec {

namespace {

// Entropies closer than this are treated as equal when orienting edges.
constexpr double kEntropyEpsilon = 1e-12;

std::vector<std::size_t> Counts(std::span<const std::int32_t> column,
                                std::size_t cardinality) {
  std::vector<std::size_t> counts(cardinality, 0);
  for (std::int32_t code : column) ++counts[static_cast<std::size_t>(code)];
  return counts;
}

// Sorted joint codes (u << 32 | v) so that cells can be counted as runs.
std::vector<std::uint64_t> JointKeys(const CategoricalTable& table,
                                     std::size_t m1, std::size_t m2) {
  auto a = table.column(m1);
  auto b = table.column(m2);
  std::vector<std::uint64_t> keys(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    keys[i] = (static_cast<std::uint64_t>(a[i]) << 32) |
              static_cast<std::uint32_t>(b[i]);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

template <typename Fn>
void ForEachCell(const std::vector<std::uint64_t>& keys, Fn&& fn) {
  std::size_t i = 0;
  while (i < keys.size()) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    fn(keys[i], j - i);
    i = j;
  }
}

void CheckFeature(const CategoricalTable& table, std::size_t m) {
  if (m >= table.num_features()) {
    throw Error(ErrorCode::kConfig, "feature index out of range");
  }
}

}  // namespace

CategoricalTable::CategoricalTable(std::vector<std::string> feature_names)
    : names_(std::move(feature_names)),
      columns_(names_.size()),
      dictionaries_(names_.size()) {}

CategoricalTable CategoricalTable::FromProfiles(
    std::vector<std::string> feature_names,
    std::span<const ProfileRecord> rows) {
  CategoricalTable table(std::move(feature_names));
  for (const auto& row : rows) table.AddRow(row.values);
  return table;
}

void CategoricalTable::AddRow(std::span<const std::string> values) {
  if (values.size() != names_.size()) {
    throw Error(ErrorCode::kInput,
                "profile row has " + std::to_string(values.size()) +
                    " values, schema has " + std::to_string(names_.size()));
  }
  for (std::size_t m = 0; m < values.size(); ++m) {
    auto& dict = dictionaries_[m];
    auto [it, inserted] = dict.try_emplace(
        values[m], static_cast<std::int32_t>(dict.size()));
    columns_[m].push_back(it->second);
  }
  ++num_rows_;
}

double Entropy(const CategoricalTable& table, std::size_t m) {
  CheckFeature(table, m);
  if (table.num_rows() == 0) return 0.0;
  const double n = static_cast<double>(table.num_rows());
  double h = 0.0;
  for (std::size_t c : Counts(table.column(m), table.cardinality(m))) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double JointEntropy(const CategoricalTable& table, std::size_t m1,
                    std::size_t m2) {
  CheckFeature(table, m1);
  CheckFeature(table, m2);
  if (table.num_rows() == 0) return 0.0;
  const double n = static_cast<double>(table.num_rows());
  double h = 0.0;
  ForEachCell(JointKeys(table, m1, m2), [&](std::uint64_t, std::size_t c) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  });
  return h;
}

double ConditionalEntropy(const CategoricalTable& table, std::size_t m1,
                          std::size_t m2) {
  CheckFeature(table, m1);
  CheckFeature(table, m2);
  if (table.num_rows() == 0) return 0.0;
  const double n = static_cast<double>(table.num_rows());
  const auto given = Counts(table.column(m2), table.cardinality(m2));
  double h = 0.0;
  ForEachCell(JointKeys(table, m1, m2), [&](std::uint64_t key, std::size_t c) {
    const auto v = static_cast<std::size_t>(key & 0xffffffffULL);
    const double p_uv = static_cast<double>(c) / n;
    h -= p_uv * std::log2(static_cast<double>(c) /
                          static_cast<double>(given[v]));
  });
  return std::max(h, 0.0);
}

UncertaintyReductionResult UncertaintyReduction(const CategoricalTable& table,
                                                std::size_t m1,
                                                std::size_t m2) {
  const double h1 = Entropy(table, m1);
  if (h1 <= 0.0) return {0.0, true};
  const double ur = 1.0 - ConditionalEntropy(table, m1, m2) / h1;
  return {std::clamp(ur, 0.0, 1.0), false};
}

std::vector<std::string> HierarchyModel::ChainNames() const {
  std::vector<std::string> out;
  for (std::size_t m : chain) out.push_back(feature_names.at(m));
  return out;
}

std::vector<std::size_t> HierarchyModel::OutDegrees() const {
  std::vector<std::size_t> degree(intensity.size(), 0);
  for (std::size_t fine = 0; fine < intensity.size(); ++fine) {
    for (std::size_t coarse = 0; coarse < intensity[fine].size(); ++coarse) {
      if (intensity[fine][coarse] > 0.0) ++degree[coarse];
    }
  }
  return degree;
}

nlohmann::json HierarchyModel::ToJson() const {
  return {
      {"version", kVersion},
      {"feature_names", feature_names},
      {"chain", ChainNames()},
      {"entropy", entropy},
      {"intensity", intensity},
      {"threshold", threshold},
      {"schema_fallback", schema_fallback},
  };
}

HierarchyModel HierarchyModel::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kVersion) {
      throw Error(ErrorCode::kInput, "unsupported hierarchy model version");
    }
    HierarchyModel model;
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& name : j.at("chain").get<std::vector<std::string>>()) {
      auto it = std::find(model.feature_names.begin(),
                          model.feature_names.end(), name);
      if (it == model.feature_names.end()) {
        throw Error(ErrorCode::kInput, "chain names unknown feature " + name);
      }
      model.chain.push_back(
          static_cast<std::size_t>(it - model.feature_names.begin()));
    }
    model.entropy = j.at("entropy").get<std::vector<double>>();
    model.intensity = j.at("intensity").get<std::vector<std::vector<double>>>();
    model.threshold = j.at("threshold").get<double>();
    model.schema_fallback = j.value("schema_fallback", false);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput,
                std::string("malformed hierarchy model: ") + e.what());
  }
}

void HierarchyModel::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInput, "cannot write " + path.string());
  out << ToJson().dump(2) << '\n';
}

HierarchyModel HierarchyModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInput, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput, path.string() + ": " + e.what());
  }
  return FromJson(j);
}

HierarchyModel LearnHierarchy(const CategoricalTable& table,
                              double threshold) {
  const std::size_t num = table.num_features();
  if (num < 2) {
    throw Error(ErrorCode::kConfig, "hierarchy needs at least two features");
  }
  if (table.num_rows() < 2) {
    throw Error(ErrorCode::kConfig, "hierarchy needs at least two rows");
  }

  HierarchyModel model;
  model.feature_names.assign(table.names().begin(), table.names().end());
  model.threshold = threshold;
  model.entropy.resize(num);
  for (std::size_t m = 0; m < num; ++m) model.entropy[m] = Entropy(table, m);

  model.intensity.assign(num, std::vector<double>(num, 0.0));
  for (std::size_t fine = 0; fine < num; ++fine) {
    for (std::size_t coarse = 0; coarse < num; ++coarse) {
      if (fine == coarse) continue;
      if (!(model.entropy[coarse] < model.entropy[fine] - kEntropyEpsilon)) {
        continue;
      }
      const auto ur = UncertaintyReduction(table, coarse, fine);
      if (!ur.degenerate && ur.value >= threshold) {
        model.intensity[fine][coarse] = ur.value;
      }
    }
  }

  const auto degree = model.OutDegrees();
  std::size_t root = 0;
  for (std::size_t m = 1; m < num; ++m) {
    if (degree[m] > degree[root] ||
        (degree[m] == degree[root] &&
         model.entropy[m] < model.entropy[root])) {
      root = m;
    }
  }
  if (degree[root] == 0) {
    throw Error(ErrorCode::kNoHierarchy,
                "no feature pair passes the hierarchy threshold");
  }

  // Greedy walk: each step moves to the out-neighbour with the largest
  // out-degree, then the strongest connecting edge, then the lowest index.
  // Entropy strictly increases along every edge, so the walk terminates.
  model.chain.push_back(root);
  std::size_t current = root;
  while (degree[current] > 0) {
    std::size_t next = num;
    for (std::size_t m = 0; m < num; ++m) {
      if (model.intensity[m][current] <= 0.0) continue;
      if (next == num || degree[m] > degree[next] ||
          (degree[m] == degree[next] &&
           model.intensity[m][current] > model.intensity[next][current])) {
        next = m;
      }
    }
    model.chain.push_back(next);
    current = next;
  }
  return model;
}

HierarchyModel LearnHierarchyOrSchema(const CategoricalTable& table,
                                      double threshold) {
  try {
    return LearnHierarchy(table, threshold);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoHierarchy) throw;
  }
  HierarchyModel model;
  model.feature_names.assign(table.names().begin(), table.names().end());
  model.threshold = threshold;
  const std::size_t num = table.num_features();
  model.intensity.assign(num, std::vector<double>(num, 0.0));
  for (std::size_t m = 0; m < num; ++m) {
    model.entropy.push_back(Entropy(table, m));
    model.chain.push_back(m);
  }
  model.schema_fallback = true;
  return model;
}

}  // namespace skurec

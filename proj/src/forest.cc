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

#include "skurec/forest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <utility>

#include "skurec/core.h"

namespace skurec {

namespace {

constexpr double kMinGain = 1e-12;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void FeatureMatrix::AppendRow(std::span<const double> values) {
  if (values.size() != cols_) {
    throw Error(ErrorCode::kInput, "feature row has wrong width");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void RegressionTree::Fit(const FeatureMatrix& x, std::span<const double> y,
                         std::vector<std::size_t> rows,
                         const TreeConfig& config) {
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "cannot fit a tree on zero rows");
  }
  nodes_.clear();
  Build(x, y, rows, 0, rows.size(), 0, config);
}

std::int32_t RegressionTree::Build(const FeatureMatrix& x,
                                   std::span<const double> y,
                                   std::vector<std::size_t>& rows,
                                   std::size_t begin, std::size_t end,
                                   std::size_t depth,
                                   const TreeConfig& config) {
  const std::size_t n = end - begin;
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += y[rows[i]];
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{.value = sum / static_cast<double>(n)});

  const std::size_t min_leaf = std::max<std::size_t>(config.min_leaf, 1);
  if (depth >= config.max_depth || n < 2 * min_leaf) return index;

  const double parent_score = sum * sum / static_cast<double>(n);
  double best_gain = kMinGain;
  std::int32_t best_feature = -1;
  double best_threshold = 0.0;

  std::vector<std::size_t> order(rows.begin() + begin, rows.begin() + end);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double xa = x.at(a, f);
      const double xb = x.at(b, f);
      return xa < xb || (xa == xb && a < b);
    });
    double left_sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      left_sum += y[order[i - 1]];
      if (i < min_leaf || n - i < min_leaf) continue;
      const double lo = x.at(order[i - 1], f);
      const double hi = x.at(order[i], f);
      if (!(lo < hi)) continue;
      const double right_sum = sum - left_sum;
      const double gain =
          left_sum * left_sum / static_cast<double>(i) +
          right_sum * right_sum / static_cast<double>(n - i) - parent_score;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = static_cast<std::int32_t>(f);
        best_threshold = lo + (hi - lo) / 2.0;
      }
    }
  }
  if (best_feature < 0) return index;

  const auto f = static_cast<std::size_t>(best_feature);
  auto mid = std::stable_partition(
      rows.begin() + begin, rows.begin() + end,
      [&](std::size_t r) { return x.at(r, f) <= best_threshold; });
  const auto split = static_cast<std::size_t>(mid - rows.begin());

  const std::int32_t left =
      Build(x, y, rows, begin, split, depth + 1, config);
  const std::int32_t right = Build(x, y, rows, split, end, depth + 1, config);
  Node& node = nodes_[static_cast<std::size_t>(index)];
  node.feature = best_feature;
  node.threshold = best_threshold;
  node.left = left;
  node.right = right;
  return index;
}

double RegressionTree::Predict(std::span<const double> row) const {
  if (nodes_.empty()) throw Error(ErrorCode::kNotFitted, "tree not fitted");
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const Node& node = nodes_[i];
    i = static_cast<std::size_t>(
        row[static_cast<std::size_t>(node.feature)] <= node.threshold
            ? node.left
            : node.right);
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[i].feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
    }
  }
  return deepest;
}

nlohmann::json RegressionTree::ToJson() const {
  // Parallel arrays keep the serialized forest compact.
  std::vector<std::int32_t> feature, left, right;
  std::vector<double> threshold, value;
  for (const Node& node : nodes_) {
    feature.push_back(node.feature);
    threshold.push_back(node.threshold);
    left.push_back(node.left);
    right.push_back(node.right);
    value.push_back(node.value);
  }
  return {{"feature", feature},
          {"threshold", threshold},
          {"left", left},
          {"right", right},
          {"value", value}};
}

RegressionTree RegressionTree::FromJson(const nlohmann::json& j) {
  RegressionTree tree;
  auto feature = j.at("feature").get<std::vector<std::int32_t>>();
  auto threshold = j.at("threshold").get<std::vector<double>>();
  auto left = j.at("left").get<std::vector<std::int32_t>>();
  auto right = j.at("right").get<std::vector<std::int32_t>>();
  auto value = j.at("value").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n ||
      value.size() != n || n == 0) {
    throw Error(ErrorCode::kInput, "malformed tree");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 &&
        (left[i] <= static_cast<std::int32_t>(i) ||
         right[i] <= static_cast<std::int32_t>(i) ||
         left[i] >= static_cast<std::int32_t>(n) ||
         right[i] >= static_cast<std::int32_t>(n))) {
      throw Error(ErrorCode::kInput, "malformed tree links");
    }
    tree.nodes_.push_back(
        Node{feature[i], threshold[i], left[i], right[i], value[i]});
  }
  return tree;
}

void RegressionForest::Fit(const FeatureMatrix& x, std::span<const double> y) {
  if (x.rows() == 0 || x.rows() != y.size()) {
    throw Error(ErrorCode::kEmptyDataset,
                "forest needs a non-empty, aligned training set");
  }
  if (config_.num_trees == 0) {
    throw Error(ErrorCode::kConfig, "forest needs at least one tree");
  }
  trees_.clear();
  trees_.reserve(config_.num_trees);
  const std::size_t n = x.rows();
  for (std::size_t t = 0; t < config_.num_trees; ++t) {
    std::vector<std::size_t> rows(n);
    if (config_.bootstrap) {
      std::mt19937_64 rng(SplitMix64(config_.seed + t));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    RegressionTree tree;
    tree.Fit(x, y, std::move(rows), config_.tree);
    trees_.push_back(std::move(tree));
  }
}

double RegressionForest::Predict(std::span<const double> row) const {
  if (trees_.empty()) throw Error(ErrorCode::kNotFitted, "forest not fitted");
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.Predict(row);
  return sum / static_cast<double>(trees_.size());
}

nlohmann::json RegressionForest::ToJson() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) trees.push_back(tree.ToJson());
  return {{"num_trees", config_.num_trees},
          {"max_depth", config_.tree.max_depth},
          {"min_leaf", config_.tree.min_leaf},
          {"bootstrap", config_.bootstrap},
          {"seed", config_.seed},
          {"trees", std::move(trees)}};
}

RegressionForest RegressionForest::FromJson(const nlohmann::json& j) {
  try {
    ForestConfig config;
    config.num_trees = j.at("num_trees").get<std::size_t>();
    config.tree.max_depth = j.at("max_depth").get<std::size_t>();
    config.tree.min_leaf = j.at("min_leaf").get<std::size_t>();
    config.bootstrap = j.at("bootstrap").get<bool>();
    config.seed = j.at("seed").get<std::uint64_t>();
    RegressionForest forest(config);
    for (const auto& t : j.at("trees")) {
      forest.trees_.push_back(RegressionTree::FromJson(t));
    }
    return forest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput, std::string("malformed forest: ") + e.what());
  }
}

}  // namespace skurec

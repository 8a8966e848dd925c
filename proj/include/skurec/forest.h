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

#ifndef SKUREC_FOREST_H_
#define SKUREC_FOREST_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace skurec {

// Dense row-major matrix of real-valued features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t cols) : cols_(cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void AppendRow(std::span<const double> values);

 private:
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> data_;
};

// Fit/predict contract for the regressor behind target encoding.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual void Fit(const FeatureMatrix& x, std::span<const double> y) = 0;
  virtual double Predict(std::span<const double> row) const = 0;
};

struct TreeConfig {
  std::size_t max_depth = 8;
  std::size_t min_leaf = 5;
};

// CART regression tree with axis-aligned splits chosen by squared-error
// reduction. Rows with x <= threshold go left.
class RegressionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
  };

  // Fits on the given row indices (duplicates allowed, e.g. a bootstrap).
  void Fit(const FeatureMatrix& x, std::span<const double> y,
           std::vector<std::size_t> rows, const TreeConfig& config);
  double Predict(std::span<const double> row) const;

  std::span<const Node> nodes() const { return nodes_; }
  std::size_t depth() const;

  nlohmann::json ToJson() const;
  static RegressionTree FromJson(const nlohmann::json& j);

 private:
  std::int32_t Build(const FeatureMatrix& x, std::span<const double> y,
                     std::vector<std::size_t>& rows, std::size_t begin,
                     std::size_t end, std::size_t depth,
                     const TreeConfig& config);

  std::vector<Node> nodes_;
};

struct ForestConfig {
  std::size_t num_trees = 100;
  TreeConfig tree;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

// Bagged regression trees; the prediction is the mean over trees.
class RegressionForest : public Regressor {
 public:
  RegressionForest() = default;
  explicit RegressionForest(ForestConfig config) : config_(config) {}

  void Fit(const FeatureMatrix& x, std::span<const double> y) override;
  double Predict(std::span<const double> row) const override;

  bool fitted() const { return !trees_.empty(); }
  const ForestConfig& config() const { return config_; }
  std::span<const RegressionTree> trees() const { return trees_; }

  nlohmann::json ToJson() const;
  static RegressionForest FromJson(const nlohmann::json& j);

 private:
  ForestConfig config_;
  std::vector<RegressionTree> trees_;
};

}  // namespace skurec

#endif  // SKUREC_FOREST_H_

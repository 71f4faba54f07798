/*
 * Copyright 2026 The tabreg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tabreg/common.hpp"

namespace tabreg {

// Rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  double cover = 0.0;  // training rows reaching the node
  double gain = 0.0;   // squared-error reduction of the split
  bool is_leaf() const { return feature < 0; }
};

// Node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  // Cover-weighted mean of the leaf values.
  double expected_value() const;
  // Throws ValidationError on malformed structure.
  void validate(std::size_t n_features) const;
};

// prediction(x) = base_prediction + learning_rate * sum_j tree_j(x)
struct TreeEnsemble {
  double base_prediction = 0.0;
  double learning_rate = 1.0;
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
  // Training mean squared error after each boosting iteration.
  std::vector<double> training_loss;

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
  // Summed split gain per feature.
  std::vector<double> gain_importance() const;
};

struct GbrParams {
  std::size_t n_iterations = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  std::size_t min_leaf = 5;
  double subsample_fraction = 1.0;
  uint64_t seed = 0;

  void validate() const;
};

// Least-squares gradient boosting. Splits are found by an exhaustive scan of
// midpoints between adjacent distinct values; gain ties keep the lowest
// feature index, then the lowest threshold.
TreeEnsemble fit_gbr(const Matrix& x, std::span<const double> y, const GbrParams& params);

}  // namespace tabreg

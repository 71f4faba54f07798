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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tabreg/model.hpp"
#include "tabreg/ranking.hpp"

namespace tabreg {

struct ShapMatrix {
  std::string model_id;
  double base_value = 0.0;
  Matrix values;  // rows x features
  std::vector<std::string> feature_names;
};

// Path-dependent TreeSHAP for one tree. Adds the attributions of `x` into
// `phi` (one slot per feature). Every node on the evaluated paths needs a
// positive cover.
void tree_shap_add(const DecisionTree& tree, std::span<const double> x, std::span<double> phi,
                   double scale = 1.0);

ShapMatrix tree_shap(const TreeEnsemble& ensemble, const Matrix& x,
                     std::vector<std::string> feature_names = {});
// Mean of per-draw TreeSHAP over every `draw_stride`-th draw.
ShapMatrix bart_shap(const BartPosterior& posterior, const Matrix& x,
                     std::vector<std::string> feature_names = {}, std::size_t draw_stride = 1);
// Linear models: beta_j * (x_j - training mean_j) around the prediction at
// the training means.
ShapMatrix linear_shap(const LinearModel& model, const Matrix& x,
                       std::vector<std::string> feature_names = {});
ShapMatrix explain(const Model& model, const Matrix& x, std::vector<std::string> feature_names,
                   std::size_t draw_stride = 1);

// Mean |attribution| per feature as a percentage of the total.
SelectorRanking shap_importance(const ShapMatrix& shap);

enum class ImportanceMetric { rmse, r2 };

// Mean metric degradation when a feature column is row-permuted. Feature j
// uses its own stream seeded from (seed, j).
SelectorRanking permutation_importance(const Model& model, const Matrix& x,
                                       std::span<const double> y, ImportanceMetric metric,
                                       std::size_t n_repeats, uint64_t seed,
                                       const std::vector<std::string>& feature_names);

struct GridSpec {
  std::size_t n_points = 50;
  double lower_quantile = 0.01;
  double upper_quantile = 0.99;
  std::vector<double> explicit_grid;  // used as-is when non-empty
};

struct PdpCurve {
  std::string feature;
  std::vector<double> grid;
  std::vector<double> mean_prediction;
  // BART only: 5th and 95th percentiles of the per-draw curves.
  std::vector<double> lower;
  std::vector<double> upper;
};

std::vector<double> pdp_grid(std::span<const double> column, const GridSpec& spec);
PdpCurve pdp(const Model& model, const Matrix& x, std::size_t feature, std::string name,
             const GridSpec& spec = {}, std::size_t draw_stride = 1);

void write_shap_csv(const ShapMatrix& shap, const std::filesystem::path& path);
void write_pdp_csv(const std::vector<PdpCurve>& curves, const std::filesystem::path& path);

}  // namespace tabreg

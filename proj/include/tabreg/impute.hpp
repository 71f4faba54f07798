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
#include <string>
#include <vector>

#include <json.hpp>

#include "tabreg/table.hpp"

namespace tabreg {

struct KnnConfig {
  std::size_t k = 5;
};

// Fills the missing cells of each target column from its k nearest rows
// (Gower distance over mutually observed feature cells, ties to the lower row
// index). Discrete columns take the neighbours' mode with ties to the lowest
// code; continuous columns take the neighbours' mean. Distances always use
// the input table, so the result does not depend on target order.
Table knn_impute(const Table& table, const KnnConfig& config,
                 const std::vector<std::string>& target_columns);

enum class ConditionalModel { ridge_linear, predictive_mean_matching };

struct MiceConfig {
  std::size_t n_iterations = 10;
  std::size_t n_imputations = 5;
  ConditionalModel conditional_model = ConditionalModel::predictive_mean_matching;
  std::size_t pmm_donors = 5;
  double ridge = 1e-6;
  // Per target column, keep only this many predictors with the largest
  // |correlation| on the column's observed rows. 0 keeps all of them.
  std::size_t max_predictors = 0;
  uint64_t seed = 0;

  void validate() const;
};

// Chained equations over the continuous target columns. Predictors are the
// other feature columns (target-role columns are never used); predictor
// columns outside the target set that still have gaps are mean-filled.
std::vector<Table> mice_impute(const Table& table, const MiceConfig& config,
                               const std::vector<std::string>& target_columns);

// Cell-wise mean over imputed cells; observed cells are copied.
Table pool_imputations(const std::vector<Table>& tables);

// Column-mean baseline for continuous columns.
Table mean_impute(const Table& table, const std::vector<std::string>& target_columns);

// Names of feature columns with at least one missing cell, split by kind.
std::vector<std::string> missing_discrete_columns(const Table& table);
std::vector<std::string> missing_continuous_columns(const Table& table);

nlohmann::json to_json(const MiceConfig& c);
MiceConfig mice_config_from_json(const nlohmann::json& j);

}  // namespace tabreg

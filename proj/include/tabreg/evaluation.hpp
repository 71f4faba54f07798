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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabreg/model.hpp"
#include "tabreg/profile.hpp"
#include "tabreg/table.hpp"

namespace tabreg {

struct MetricsReport {
  double r2 = 0.0;  // NaN when undefined
  double mse = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
  std::string split_id;
  // False when the observed target is constant (including n == 1).
  bool r2_defined = true;
};

MetricsReport compute_metrics(std::span<const double> y, std::span<const double> yhat,
                              std::string split_id = {});

struct CvResult {
  std::vector<MetricsReport> folds;
  // Metrics over the concatenated out-of-fold predictions.
  MetricsReport pooled;
  std::vector<std::size_t> fold_of;
  std::vector<double> oof_predictions;
};

// Every training partition must keep at least two rows.
CvResult kfold_cv(const Table& table, std::string_view target, const ModelFactory& factory,
                  std::size_t k_folds, uint64_t seed, std::span<const std::string> features = {});

struct ResidualReport {
  std::vector<double> residuals;  // y - yhat
  std::vector<double> predicted;
  Histogram histogram;
  std::vector<double> kde_grid;
  std::vector<double> kde_density;
  double bandwidth = 0.0;
  // Sorted standardized residuals against standard normal quantiles of
  // (i - 0.5) / n.
  std::vector<double> qq_theoretical;
  std::vector<double> qq_sample;
  double skewness = 0.0;
  double residual_vs_predicted_slope = 0.0;
  bool degenerate = false;  // zero residual variance: no KDE or QQ data
};

inline constexpr std::size_t kKdeGridPoints = 512;

// Silverman bandwidth unless `bandwidth` is given.
ResidualReport residual_report(std::span<const double> y, std::span<const double> yhat,
                               std::size_t n_bins = 30,
                               std::optional<double> bandwidth = std::nullopt);
double silverman_bandwidth(std::span<const double> values);

struct ComparisonConfig {
  std::string imputer;   // label
  std::string selector;  // label
  ModelSpec model;
  // Identity when unset. Runs on the full table before the split.
  std::function<Table(const Table&)> impute;
  // All features when unset. Sees only the training rows.
  std::function<std::vector<std::string>(const Table&)> select;
};

struct ComparisonRow {
  std::string imputer;
  std::string selector;
  std::string model_id;
  std::vector<std::string> features;
  MetricsReport test;
  bool failed = false;
  std::string error;
  nlohmann::json provenance;
};

// All configs share one train/test split. Rows come back sorted by test R^2
// descending; failed rows go last, each group keeping config order on ties.
std::vector<ComparisonRow> model_comparison(const Table& table, std::string_view target,
                                            const std::vector<ComparisonConfig>& configs,
                                            double test_fraction, uint64_t split_seed);

nlohmann::json to_json(const MetricsReport& m);
nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const std::vector<ComparisonRow>& rows);
void write_comparison_csv(const std::vector<ComparisonRow>& rows,
                          const std::filesystem::path& path);
void write_residual_csvs(const ResidualReport& r, const std::filesystem::path& dir,
                         const std::string& prefix);

}  // namespace tabreg

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

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tabreg/table.hpp"

namespace tabreg {

struct SummaryStats {
  std::size_t n_observed = 0;
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator; 0 for a single value
  // Adjusted Fisher-Pearson skewness, defined for n >= 3 and sd > 0.
  std::optional<double> skewness;
  // Bias-corrected excess kurtosis, defined for n >= 4 and sd > 0.
  std::optional<double> excess_kurtosis;
  double min = 0.0;
  double max = 0.0;
  bool zero_variance = false;
};

// Statistics over the present cells. Throws when nothing is present.
SummaryStats summarize(std::span<const double> values, std::span<const CellState> state);
SummaryStats summarize(std::span<const double> values);
SummaryStats summarize(const Column& column);

enum class Normality { normal, non_normal };

inline constexpr double kDefaultSkewTolerance = 0.5;
inline constexpr double kDefaultKurtosisTolerance = 1.0;

// normal iff |skewness| <= skew_tol and |excess kurtosis| <= kurt_tol;
// undefined moments classify as non_normal.
Normality classify_normality(const SummaryStats& stats,
                             double skew_tol = kDefaultSkewTolerance,
                             double kurt_tol = kDefaultKurtosisTolerance);

// WHO birth-weight bands in grams: <1500, [1500, 2500), [2500, 4000], >4000.
enum class WeightClass { very_low, moderately_low, normal, high };
WeightClass who_bw_class(double weight_g);
std::string_view to_string(WeightClass c);

struct Histogram {
  std::vector<double> edges;  // bins + 1 ascending edges
  std::vector<std::size_t> counts;
};

// Equal-width bins over [min, max]; the last bin is closed.
Histogram histogram(std::span<const double> values, std::size_t bins);
void write_histogram_csv(const Histogram& h, const std::filesystem::path& path);

struct ColumnProfile {
  std::string name;
  Kind kind = Kind::continuous;
  Role role = Role::feature;
  double missing_fraction = 0.0;
  std::optional<SummaryStats> stats;  // continuous columns with data
  std::optional<Normality> normality;
  // Discrete columns: (category code, count), ascending by code.
  std::vector<std::pair<long long, std::size_t>> frequencies;
  bool zero_variance = false;
};

struct ProfileReport {
  std::vector<ColumnProfile> columns;  // features and target, table order
  std::size_t n_features = 0;
  std::size_t n_continuous = 0;  // over features and target
  std::size_t n_discrete = 0;
  std::size_t n_normal = 0;
  std::size_t n_non_normal = 0;
  std::size_t n_zero_variance = 0;
  double dataset_missing_fraction = 0.0;
  // Target weight classes in WHO order; empty when the table has no target.
  std::vector<std::size_t> target_weight_classes;
};

ProfileReport profile_table(const Table& table, double skew_tol = kDefaultSkewTolerance,
                            double kurt_tol = kDefaultKurtosisTolerance);
nlohmann::json to_json(const SummaryStats& s);
nlohmann::json to_json(const ProfileReport& report);

}  // namespace tabreg

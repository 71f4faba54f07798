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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabreg/model.hpp"
#include "tabreg/ranking.hpp"
#include "tabreg/table.hpp"

namespace tabreg {

// ---- Pairwise statistics (NaN-free inputs) -------------------------------

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
// Tau-b, which equals tau-a when neither input has ties.
double kendall(std::span<const double> x, std::span<const double> y);

// Equal-frequency bin index per value; tied values share a bin.
std::vector<int> equal_frequency_bins(std::span<const double> x, std::size_t bins);
// Plug-in mutual information in nats between two code vectors.
double mutual_information(std::span<const int> a, std::span<const int> b);
// One-way ANOVA F over integer group labels. Returns NaN when fewer than two
// groups are present and +inf when the within-group variance is zero.
double anova_f(std::span<const double> values, std::span<const int> groups);

// ---- Filter selectors ------------------------------------------------------
// Scores use the rows where both the feature and the target are observed.

enum class CorrelationMethod { pearson, spearman, kendall };

SelectorRanking correlation_scores(const Table& table, std::string_view target,
                                   CorrelationMethod method);
SelectorRanking mutual_information_scores(const Table& table, std::string_view target,
                                          std::size_t bins = 10);
// Discrete features group by code; continuous features are cut into
// equal-frequency bins first. Infinite F is capped at 1e12 and flagged.
SelectorRanking anova_f_scores(const Table& table, std::string_view target,
                               std::size_t bins = 10);
// RReliefF with uniform neighbour weights. n_samples = 0 uses every row.
SelectorRanking relief_f_scores(const Table& table, std::string_view target,
                                std::size_t n_neighbors = 10, std::size_t n_samples = 0,
                                uint64_t seed = 0);

inline constexpr double kAnovaCap = 1e12;

std::vector<std::string> select_k_best(const SelectorRanking& ranking, std::size_t k);

// ---- Wrapper selectors -----------------------------------------------------
// These need complete feature and target cells.

// Mean R^2 over k folds; folds with a constant test target are skipped.
double cv_r2(const ModelFactory& factory, const Matrix& x, std::span<const double> y,
             std::size_t folds, uint64_t seed);

struct ForwardSelection {
  std::vector<std::string> features;  // in order of addition
  std::vector<double> cv_r2;          // score after each addition
  double baseline_r2 = 0.0;           // intercept-only model
};

ForwardSelection forward_select(const Table& table, std::string_view target,
                                const ModelFactory& factory, std::size_t k,
                                std::size_t cv_folds, uint64_t seed);

// Drops the `step` least important features per round (ties drop the later
// column first); the last round is clamped to land exactly on k.
std::vector<std::string> rfe(const Table& table, std::string_view target,
                             const ModelFactory& factory, std::size_t k, std::size_t step);

enum class Verdict { confirmed, tentative, rejected };
std::string_view to_string(Verdict v);

struct BorutaVerdict {
  std::vector<std::string> features;
  std::vector<Verdict> verdicts;
  std::vector<std::size_t> hits;
  std::vector<std::size_t> rounds_seen;
  std::size_t n_rounds = 0;
  double alpha = 0.05;

  std::vector<std::string> confirmed() const;
};

// Every round adds a fresh row-permuted shadow of each input feature, rejected
// ones included, so the shadow pool never shrinks. Importance is
// boosted-tree split gain. A feature confirmed or rejected by the
// two-sided binomial test (p = 0.5, level alpha Bonferroni-split over the
// features still tentative) keeps its verdict; rejected
// features leave the model.
BorutaVerdict boruta(const Table& table, std::string_view target, const GbrParams& params,
                     double alpha, std::size_t max_rounds, uint64_t seed);

nlohmann::json to_json(const BorutaVerdict& v);

// ---- Embedded selectors ----------------------------------------------------

enum class EmbeddedMethod { lasso, ridge, elastic_net, tree_gain };

// Linear methods pick their penalty by 5-fold CV and score |coefficient| on
// standardized features; tree_gain scores summed split gain.
SelectorRanking embedded_scores(const Table& table, std::string_view target,
                                EmbeddedMethod method, uint64_t seed,
                                const GbrParams& tree_params = {});

// ---- Consensus -------------------------------------------------------------

// Borda count: each method awards n - rank points. Ties follow the first
// ranking's universe order.
SelectorRanking aggregate_rankings(const std::vector<SelectorRanking>& rankings);

}  // namespace tabreg

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
#include <vector>

#include "tabreg/common.hpp"
#include "tabreg/ranking.hpp"
#include "tabreg/tree.hpp"

namespace tabreg {

struct BartConfig {
  std::size_t n_trees = 100;
  std::size_t n_iterations = 1200;
  std::size_t burn_in = 200;
  std::size_t thin = 1;
  // Tree prior: P(node at depth d splits) = alpha * (1 + d)^-beta.
  double alpha = 0.95;
  double beta = 2.0;
  // Leaf prior sd on the [-0.5, 0.5] target scale is 0.5 / (k * sqrt(n_trees)).
  double k = 2.0;
  // sigma^2 ~ nu * lambda / chi2(nu), lambda set so P(sigma < sigma_hat) = q.
  double nu = 3.0;
  double q = 0.9;
  std::size_t max_cutpoints = 100;
  std::size_t min_leaf = 5;
  // Proposal mix; change moves only touch nodes whose children are leaves.
  double p_grow = 0.4;
  double p_prune = 0.4;
  uint64_t seed = 0;

  void validate() const;
  std::size_t retained_draws() const { return (n_iterations - burn_in) / thin; }
};

struct BartPosterior {
  // Retained sum-of-trees draws in the original target units. Each draw has
  // learning_rate 1 and base_prediction equal to the target-scale offset.
  std::vector<TreeEnsemble> draws;
  std::vector<double> sigma_draws;  // retained draws, target units
  BartConfig config;
  std::size_t n_features = 0;
  // Fraction of MH proposals accepted over the whole run.
  double acceptance_rate = 0.0;
};

// Backfitting MCMC with grow/prune/change proposals. Refuses fewer than 10
// rows. Bit-reproducible for a fixed config seed.
BartPosterior fit_bart(const Matrix& x, std::span<const double> y, const BartConfig& config);

struct BartPrediction {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> lower;  // 5th percentile over draws
  std::vector<double> upper;  // 95th percentile over draws
};

BartPrediction predict_bart(const BartPosterior& posterior, const Matrix& x);
// Rows of the returned matrix are draws, columns are input rows.
Matrix predict_bart_draws(const BartPosterior& posterior, const Matrix& x);

// Share of split rules using each feature, averaged over draws that split.
SelectorRanking variable_inclusion(const BartPosterior& posterior,
                                   const std::vector<std::string>& feature_names);
std::vector<double> inclusion_proportions(const BartPosterior& posterior);

}  // namespace tabreg

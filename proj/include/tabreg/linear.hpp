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

struct LinearOptions {
  double l1 = 0.0;
  double l2 = 0.0;
  // Scale centered features to unit (population) sd before fitting. With
  // false the features are only centered.
  bool standardize = true;
  // Stop when every coordinate's step, measured as the change in its partial
  // gradient (|delta beta_j| * ||x_j||^2), is below tol.
  double tol = 1e-8;
  std::size_t max_sweeps = 10000;
};

// Minimizer of 0.5 * ||y - X b - b0||^2 + l1 * ||b||_1 + 0.5 * l2 * ||b||^2
// over the centered (and optionally scaled) features; b0 is unpenalized.
struct LinearModel {
  double intercept = 0.0;
  std::vector<double> coefficients;  // original feature units
  std::vector<double> feature_means;
  std::vector<double> feature_scales;  // 1 when not standardized, 0 for constants
  // Coefficients in the fitted (centered/scaled) space.
  std::vector<double> fitted_coefficients;
  std::size_t sweeps = 0;
  bool converged = false;
};

double soft_threshold(double z, double gamma);

LinearModel fit_linear(const Matrix& x, std::span<const double> y, double l1, double l2);
LinearModel fit_linear(const Matrix& x, std::span<const double> y, const LinearOptions& options);

std::vector<double> predict(const LinearModel& model, const Matrix& x);

// Largest |x_j^T (y - mean y)| over the fitted-space features: the smallest
// l1 penalty that zeroes every coefficient.
double max_l1_penalty(const Matrix& x, std::span<const double> y, bool standardize = true);

struct PenaltySearch {
  std::vector<double> penalties;  // descending
  std::vector<double> cv_mse;
  double best_penalty = 0.0;
};

// K-fold CV over a geometric grid of total penalty alpha, with
// l1 = alpha * l1_ratio and l2 = alpha * (1 - l1_ratio). The grid runs from
// the all-zero penalty down three decades (l1_ratio > 0) or spans 1e-4 n to
// 1e4 n (pure ridge).
PenaltySearch cross_validate_penalty(const Matrix& x, std::span<const double> y,
                                     double l1_ratio, std::size_t folds, uint64_t seed,
                                     std::size_t n_penalties = 40);

}  // namespace tabreg

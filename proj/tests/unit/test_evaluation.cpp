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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "tabreg/evaluation.hpp"
#include "test_util.hpp"

namespace tabreg {
namespace {

TEST(Metrics, HandExample) {
  const std::vector<double> y{1, 2, 3}, yhat{1, 2, 4};
  const auto m = compute_metrics(y, yhat, "test");
  EXPECT_NEAR(m.mse, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.rmse, std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(m.r2, 0.5, 1e-15);
  EXPECT_EQ(m.n, 3u);
  EXPECT_EQ(m.split_id, "test");
}

TEST(Metrics, IdentitiesOnRandomData) {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const auto y = testing::random_vector(100, seed, -50, 50);
    const auto noise = testing::random_vector(100, seed + 77);
    std::vector<double> yhat(100);
    for (std::size_t i = 0; i < 100; ++i) yhat[i] = 0.9 * y[i] + 5 * noise[i];
    const auto m = compute_metrics(y, yhat);
    EXPECT_NEAR(m.rmse * m.rmse, m.mse, 1e-9 * std::max(1.0, m.mse));
    EXPECT_NEAR(compute_metrics(y, y).r2, 1.0, 1e-12);
    EXPECT_EQ(compute_metrics(y, y).mse, 0.0);
    const std::vector<double> flat(100, mean(y));
    EXPECT_NEAR(compute_metrics(y, flat).r2, 0.0, 1e-12);
    // R^2 is unchanged by a common affine map of y and yhat.
    std::vector<double> ya(100), yha(100);
    for (std::size_t i = 0; i < 100; ++i) {
      ya[i] = 3 * y[i] - 7;
      yha[i] = 3 * yhat[i] - 7;
    }
    EXPECT_NEAR(compute_metrics(ya, yha).r2, m.r2, 1e-10);
    EXPECT_NEAR(compute_metrics(ya, yha).mse, 9 * m.mse, 1e-9 * m.mse);
  }
}

TEST(Metrics, UndefinedR2AndBadInput) {
  const std::vector<double> y{2, 2, 2};
  const auto m = compute_metrics(y, std::vector<double>{1, 2, 3});
  EXPECT_FALSE(m.r2_defined);
  EXPECT_TRUE(std::isnan(m.r2));
  EXPECT_FALSE(compute_metrics(std::vector<double>{1.0}, std::vector<double>{1.0}).r2_defined);
  EXPECT_THROW(compute_metrics(y, std::vector<double>{1, 2}), ValidationError);
}

ModelSpec ridge() {
  ModelSpec s;
  s.id = "ridge";
  s.kind = ModelKind::linear;
  s.linear.l2 = 1e-3;
  return s;
}

Table linear_table(std::size_t n, uint64_t seed) {
  const Matrix x = testing::random_matrix(n, 3, seed);
  const auto e = testing::random_vector(n, seed + 3);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 1 + 2 * x(i, 0) - x(i, 2) + 0.1 * e[i];
  return testing::make_table(x, y);
}

TEST(CrossValidation, FoldsPartitionRows) {
  const Table t = linear_table(103, 1);
  const auto cv = kfold_cv(t, "y", make_factory(ridge()), 5, 9);
  ASSERT_EQ(cv.folds.size(), 5u);
  ASSERT_EQ(cv.oof_predictions.size(), 103u);
  std::vector<std::size_t> sizes(5, 0);
  for (std::size_t f : cv.fold_of) sizes[f]++;
  for (std::size_t s : sizes) {
    EXPECT_GE(s, 20u);
    EXPECT_LE(s, 21u);
  }
  std::size_t total = 0;
  for (const auto& f : cv.folds) total += f.n;
  EXPECT_EQ(total, 103u);
  const auto pooled = compute_metrics(t.column("y").values, cv.oof_predictions);
  EXPECT_NEAR(cv.pooled.mse, pooled.mse, 1e-12);
  EXPECT_GT(cv.pooled.r2, 0.99);
}

TEST(CrossValidation, LeaveOneOutAndLimits) {
  const Table t = linear_table(12, 2);
  const auto loo = kfold_cv(t, "y", make_factory(ridge()), 12, 1);
  for (const auto& f : loo.folds) EXPECT_EQ(f.n, 1u);
  std::set<std::size_t> folds(loo.fold_of.begin(), loo.fold_of.end());
  EXPECT_EQ(folds.size(), 12u);
  EXPECT_THROW(kfold_cv(t, "y", make_factory(ridge()), 13, 1), ValidationError);
  EXPECT_THROW(kfold_cv(t, "y", make_factory(ridge()), 1, 1), ValidationError);
}

TEST(Residuals, KdeIntegratesToOneAndQqIsNormalForGaussianResiduals) {
  Rng rng(5);
  std::normal_distribution<double> z(0.0, 2.0);
  std::vector<double> y(5000), yhat(5000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    yhat[i] = 10.0 + static_cast<double>(i % 50);
    y[i] = yhat[i] + z(rng);
  }
  const auto r = residual_report(y, yhat, 30);
  ASSERT_EQ(r.kde_grid.size(), kKdeGridPoints);
  double integral = 0;
  for (std::size_t k = 1; k < r.kde_grid.size(); ++k) {
    integral += 0.5 * (r.kde_density[k] + r.kde_density[k - 1]) * (r.kde_grid[k] - r.kde_grid[k - 1]);
  }
  EXPECT_NEAR(integral, 1.0, 0.01);
  EXPECT_NEAR(r.bandwidth, silverman_bandwidth(r.residuals), 1e-15);
  double worst = 0;
  for (std::size_t k = 0; k < r.qq_sample.size(); ++k) {
    const double p = (static_cast<double>(k) + 0.5) / 5000.0;
    if (p < 0.05 || p > 0.95) continue;  // extreme order statistics are noisy
    worst = std::max(worst, std::fabs(r.qq_sample[k] - r.qq_theoretical[k]));
  }
  EXPECT_LE(worst, 0.08);
  EXPECT_LE(std::fabs(r.skewness), 0.1);
  EXPECT_NEAR(r.residual_vs_predicted_slope, 0.0, 0.02);
  std::size_t counted = 0;
  for (auto c : r.histogram.counts) counted += c;
  EXPECT_EQ(counted, 5000u);
  EXPECT_TRUE(std::is_sorted(r.qq_sample.begin(), r.qq_sample.end()));
}

TEST(Residuals, SkewedResidualsAndDegenerateCase) {
  Rng rng(6);
  std::lognormal_distribution<double> ln(0.0, 0.8);
  std::vector<double> y(2000), yhat(2000, 0.0);
  for (auto& v : y) v = ln(rng);
  EXPECT_GT(residual_report(y, yhat).skewness, 1.0);
  const auto r = residual_report(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3});
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(r.kde_grid.empty());
  const auto fixed = residual_report(y, yhat, 10, 0.25);
  EXPECT_EQ(fixed.bandwidth, 0.25);
}

TEST(Comparison, SortedByTestR2WithFailuresLast) {
  const Table t = linear_table(200, 3);
  ModelSpec gbr;
  gbr.id = "gbr";
  gbr.kind = ModelKind::gbr;
  gbr.gbr.n_iterations = 5;
  gbr.gbr.max_depth = 1;
  std::vector<ComparisonConfig> cfgs;
  cfgs.push_back({"none", "all", gbr, {}, {}});
  cfgs.push_back({"none", "all", ridge(), {}, {}});
  cfgs.push_back({"none", "broken", ridge(), {},
                  [](const Table&) -> std::vector<std::string> { throw ValidationError("no"); }});
  cfgs.push_back({"none", "x1", ridge(), {},
                  [](const Table&) { return std::vector<std::string>{"x1"}; }});
  const auto rows = model_comparison(t, "y", cfgs, 0.25, 11);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].model_id, "ridge");
  EXPECT_EQ(rows[0].selector, "all");
  EXPECT_EQ(rows[1].model_id, "gbr");
  EXPECT_EQ(rows[2].selector, "x1");
  EXPECT_TRUE(rows[3].failed);
  EXPECT_FALSE(rows[3].error.empty());
  EXPECT_EQ(rows[0].test.n, 50u);
  for (std::size_t i = 0; i + 2 < rows.size(); ++i) EXPECT_GE(rows[i].test.r2, rows[i + 1].test.r2);
  // Same split and seeds on rerun.
  EXPECT_EQ(to_json(model_comparison(t, "y", cfgs, 0.25, 11)), to_json(rows));
}

}  // namespace
}  // namespace tabreg

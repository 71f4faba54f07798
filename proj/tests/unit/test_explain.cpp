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
#include <functional>
#include <numeric>

#include "shap_oracle.hpp"
#include "tabreg/explain.hpp"
#include "test_util.hpp"

namespace tabreg {
namespace {

TEST(TreeShap, MatchesEnumeratedShapleyValues) {
  Rng rng(42);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t p = 1 + static_cast<std::size_t>(rep % 5);
    const DecisionTree t = testing::random_tree(p, 1 + rep % 4, rng);
    const Matrix x = testing::random_matrix(5, p, 100 + static_cast<uint64_t>(rep), -1.2, 1.2);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      std::vector<double> phi(p, 0.0);
      tree_shap_add(t, x.row(r), phi);
      const auto want = testing::brute_force_shapley(t, x.row(r), p);
      for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(phi[j], want[j], 1e-10) << rep;
    }
  }
}

TEST(TreeShap, EnsembleLocalAccuracy) {
  Rng rng(7);
  TreeEnsemble e;
  e.n_features = 4;
  e.base_prediction = 2.5;
  e.learning_rate = 0.3;
  for (int k = 0; k < 15; ++k) e.trees.push_back(testing::random_tree(4, 3, rng));
  const Matrix x = testing::random_matrix(30, 4, 8);
  const ShapMatrix s = tree_shap(e, x, {"a", "b", "c", "d"});
  double expected = 0;
  for (const auto& t : e.trees) expected += t.expected_value();
  EXPECT_NEAR(s.base_value, e.base_prediction + e.learning_rate * expected, 1e-12);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double total = s.base_value;
    for (std::size_t j = 0; j < 4; ++j) total += s.values(r, j);
    EXPECT_NEAR(total, e.predict_row(x.row(r)), 1e-9);
  }
}

TEST(TreeShap, UnusedFeatureGetsZero) {
  const Matrix x = testing::random_matrix(150, 3, 5);
  std::vector<double> y(150);
  for (std::size_t i = 0; i < 150; ++i) y[i] = x(i, 0) + x(i, 2) * x(i, 2);
  GbrParams p;
  p.n_iterations = 20;
  const TreeEnsemble e = fit_gbr(x, y, p);
  bool uses1 = false;
  for (const auto& t : e.trees) {
    for (const auto& n : t.nodes) uses1 |= n.feature == 1;
  }
  const ShapMatrix s = tree_shap(e, x);
  if (!uses1) {
    for (std::size_t r = 0; r < x.rows(); ++r) EXPECT_EQ(s.values(r, 1), 0.0);
  }
  // Importance percentages sum to 100.
  const auto imp = shap_importance(s);
  double total = 0;
  for (const auto& en : imp.entries) total += en.score;
  EXPECT_NEAR(total, 100.0, 1e-9);
}

TEST(TreeShap, RejectsCoverlessTrees) {
  TreeEnsemble e;
  e.n_features = 1;
  DecisionTree t;
  t.nodes.resize(3);
  t.nodes[0].feature = 0;
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  e.trees.push_back(t);
  EXPECT_THROW(tree_shap(e, testing::random_matrix(2, 1, 1)), ValidationError);
  EXPECT_THROW(tree_shap(e, testing::random_matrix(2, 2, 1)), ValidationError);
}

TEST(BartShap, AveragesStridedDraws) {
  const Matrix x = testing::random_matrix(80, 3, 9);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = 2 * x(i, 0) - x(i, 1);
  BartConfig c;
  c.n_trees = 10;
  c.n_iterations = 50;
  c.burn_in = 10;
  const BartPosterior post = fit_bart(x, y, c);
  const ShapMatrix s = bart_shap(post, x, {}, 4);
  std::size_t used = 0;
  Matrix want(x.rows(), 3);
  for (std::size_t d = 0; d < post.draws.size(); d += 4, ++used) {
    const ShapMatrix sd = tree_shap(post.draws[d], x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t j = 0; j < 3; ++j) want(r, j) += sd.values(r, j);
    }
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double total = s.base_value;
    double mean_pred = 0;
    for (std::size_t d = 0; d < post.draws.size(); d += 4) mean_pred += post.draws[d].predict_row(x.row(r));
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(s.values(r, j), want(r, j) / static_cast<double>(used), 1e-9);
      total += s.values(r, j);
    }
    EXPECT_NEAR(total, mean_pred / static_cast<double>(used), 1e-9);
  }
}

Model linear_model(std::vector<double> beta, std::vector<double> means, double intercept) {
  LinearModel lm;
  lm.intercept = intercept;
  lm.coefficients = std::move(beta);
  lm.feature_means = std::move(means);
  lm.feature_scales.assign(lm.coefficients.size(), 1.0);
  lm.fitted_coefficients = lm.coefficients;
  Model m;
  m.id = "lin";
  m.fit = lm;
  return m;
}

TEST(LinearShap, ClosedForm) {
  const Model m = linear_model({2.0, -1.0, 0.5}, {0.1, 0.2, 0.3}, 4.0);
  const Matrix x = testing::random_matrix(10, 3, 3);
  const ShapMatrix s = explain(m, x, {"a", "b", "c"});
  EXPECT_NEAR(s.base_value, 4.0 + 0.2 - 0.2 + 0.15, 1e-15);
  const auto pred = predict(m, x);
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_NEAR(s.values(r, 1), -1.0 * (x(r, 1) - 0.2), 1e-15);
    EXPECT_NEAR(s.base_value + s.values(r, 0) + s.values(r, 1) + s.values(r, 2), pred[r], 1e-12);
  }
}

TEST(Pdp, LinearModelCurveIsExact) {
  const Model m = linear_model({2.0, -1.0}, {0.0, 0.0}, 1.0);
  const Matrix x = testing::random_matrix(40, 2, 4);
  GridSpec g;
  g.n_points = 11;
  const PdpCurve c = pdp(m, x, 0, "a", g);
  ASSERT_EQ(c.grid.size(), 11u);
  EXPECT_NEAR(c.grid.front(), quantile(x.column(0), 0.01), 1e-15);
  EXPECT_DOUBLE_EQ(c.grid.back(), quantile(x.column(0), 0.99));
  const double mean_x1 = mean(x.column(1));
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    EXPECT_NEAR(c.mean_prediction[k], 1.0 + 2.0 * c.grid[k] - mean_x1, 1e-12);
  }
  EXPECT_TRUE(c.lower.empty());
  g.explicit_grid = {0.0, 0.5, 0.25};
  EXPECT_THROW(pdp(m, x, 0, "a", g), ValidationError);
  EXPECT_THROW(pdp(m, x, 5, "a"), ValidationError);
}

// Staircase ensemble for f = g(x0) + h(x1): one stump per step.
TreeEnsemble additive_staircase(const std::function<double(double)>& g,
                                const std::function<double(double)>& h, std::size_t steps) {
  TreeEnsemble e;
  e.n_features = 2;
  e.learning_rate = 1.0;
  e.base_prediction = g(-1.0) + h(-1.0);
  for (std::size_t f = 0; f < 2; ++f) {
    const auto& fn = f == 0 ? g : h;
    for (std::size_t k = 0; k < steps; ++k) {
      const double lo = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(steps);
      const double hi = -1.0 + 2.0 * static_cast<double>(k + 1) / static_cast<double>(steps);
      DecisionTree t;
      t.nodes.resize(3);
      t.nodes[0].feature = static_cast<int>(f);
      t.nodes[0].threshold = 0.5 * (lo + hi);
      t.nodes[0].left = 1;
      t.nodes[0].right = 2;
      t.nodes[2].value = fn(hi) - fn(lo);
      for (auto& n : t.nodes) n.cover = 1.0;
      t.nodes[0].cover = 2.0;
      e.trees.push_back(std::move(t));
    }
  }
  return e;
}

TEST(Pdp, AdditiveModelRecoversComponentUpToConstant) {
  const auto g = [](double v) { return 2.0 * std::sin(2.0 * v); };
  const auto h = [](double v) { return 3.0 * v * v; };
  Model m;
  m.id = "additive";
  m.fit = additive_staircase(g, h, 1000);
  const Matrix x = testing::random_matrix(500, 2, 12);
  const PdpCurve c = pdp(m, x, 0, "x0");
  ASSERT_EQ(c.grid.size(), 50u);
  std::vector<double> d(c.grid.size()), truth(c.grid.size());
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    truth[k] = g(c.grid[k]);
    d[k] = c.mean_prediction[k] - truth[k];
  }
  const double shift = mean(d);
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  double worst = 0;
  for (double v : d) worst = std::max(worst, std::fabs(v - shift));
  EXPECT_LE(worst, 0.01 * (*hi - *lo));
  // The constant is the mean of h over the rows.
  double hbar = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) hbar += h(x(i, 1)) / static_cast<double>(x.rows());
  EXPECT_NEAR(shift, hbar, 0.02);
}

TEST(Pdp, BartBandsBracketMean) {
  const Matrix x = testing::random_matrix(60, 2, 6);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = 3 * x(i, 0);
  BartConfig c;
  c.n_trees = 10;
  c.n_iterations = 60;
  c.burn_in = 20;
  Model m;
  m.id = "bart";
  m.fit = fit_bart(x, y, c);
  const PdpCurve curve = pdp(m, x, 0, "a", GridSpec{.n_points = 7}, 2);
  for (std::size_t k = 0; k < 7; ++k) {
    EXPECT_LE(curve.lower[k], curve.mean_prediction[k] + 1e-12);
    EXPECT_GE(curve.upper[k], curve.mean_prediction[k] - 1e-12);
  }
  EXPECT_GT(curve.mean_prediction.back() - curve.mean_prediction.front(), 2.0);
}

TEST(PermutationImportance, IgnoredFeatureScoresZero) {
  const Model m = linear_model({2.0, 0.0, 1.0}, {0.0, 0.0, 0.0}, 0.0);
  const Matrix x = testing::random_matrix(200, 3, 10);
  const auto y = predict(m, x);
  for (auto metric : {ImportanceMetric::rmse, ImportanceMetric::r2}) {
    const auto r = permutation_importance(m, x, y, metric, 4, 3, {"a", "b", "c"});
    EXPECT_EQ(r.entry("b").score, 0.0);
    EXPECT_GT(r.entry("a").score, r.entry("c").score);
    EXPECT_EQ(to_json(r), to_json(permutation_importance(m, x, y, metric, 4, 3, {"a", "b", "c"})));
  }
  EXPECT_THROW(permutation_importance(m, x, y, ImportanceMetric::r2, 0, 1, {"a", "b", "c"}),
               ValidationError);
}

}  // namespace
}  // namespace tabreg

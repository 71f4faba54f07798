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

#include <cmath>
#include <numeric>

#include "tabreg/bart.hpp"
#include "tabreg/synth.hpp"
#include "test_util.hpp"

namespace tabreg {
namespace {

BartConfig small_config(uint64_t seed) {
  BartConfig c;
  c.n_trees = 30;
  c.n_iterations = 300;
  c.burn_in = 100;
  c.seed = seed;
  return c;
}

struct Fixture {
  Matrix x;
  std::vector<double> y;
  std::vector<double> f;
};

Fixture make_data(std::size_t n, uint64_t seed, double noise) {
  Fixture d;
  d.x = testing::random_matrix(n, 4, seed);
  const auto eps = testing::random_vector(n, seed + 1000);
  d.y.resize(n);
  d.f.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.f[i] = 10 + 3 * d.x(i, 0) + 2 * (d.x(i, 1) > 0 ? 1.0 : -1.0);
    // Uniform(-1, 1) scaled to the requested sd.
    d.y[i] = d.f[i] + noise * std::sqrt(3.0) * eps[i];
  }
  return d;
}

TEST(Bart, ConfigValidation) {
  BartConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.retained_draws(), 1000u);
  c.burn_in = c.n_iterations;
  EXPECT_THROW(c.validate(), ValidationError);
  c = BartConfig{};
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = BartConfig{};
  c.q = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = BartConfig{};
  c.p_grow = 0.7;
  c.p_prune = 0.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = BartConfig{};
  c.thin = 3;
  EXPECT_EQ(c.retained_draws(), 333u);
}

TEST(Bart, RejectsBadInput) {
  const Matrix x = testing::random_matrix(8, 2, 1);
  EXPECT_THROW(fit_bart(x, std::vector<double>(8, 1.0), small_config(1)), ValidationError);
  Matrix x2 = testing::random_matrix(20, 2, 1);
  std::vector<double> y(20, 0.0);
  y[3] = std::nan("");
  EXPECT_THROW(fit_bart(x2, y, small_config(1)), ValidationError);
  EXPECT_THROW(fit_bart(x2, std::vector<double>(19, 0.0), small_config(1)), ValidationError);
}

TEST(Bart, DeterministicForSeedAndThreadCount) {
  const Fixture d = make_data(150, 3, 0.5);
  const std::size_t saved = max_threads();
  set_max_threads(1);
  const BartPosterior a = fit_bart(d.x, d.y, small_config(9));
  const auto pa = predict_bart(a, d.x);
  set_max_threads(4);
  const BartPosterior b = fit_bart(d.x, d.y, small_config(9));
  const auto pb = predict_bart(b, d.x);
  set_max_threads(saved);
  EXPECT_EQ(pa.mean, pb.mean);
  EXPECT_EQ(a.sigma_draws, b.sigma_draws);
  const BartPosterior c = fit_bart(d.x, d.y, small_config(10));
  EXPECT_NE(predict_bart(c, d.x).mean, pa.mean);
}

TEST(Bart, PosteriorShapeAndSummaries) {
  const Fixture d = make_data(200, 5, 0.5);
  const BartConfig cfg = small_config(2);
  const BartPosterior post = fit_bart(d.x, d.y, cfg);
  ASSERT_EQ(post.draws.size(), cfg.retained_draws());
  ASSERT_EQ(post.sigma_draws.size(), cfg.retained_draws());
  EXPECT_GT(post.acceptance_rate, 0.0);
  EXPECT_LT(post.acceptance_rate, 1.0);
  for (const auto& draw : post.draws) {
    EXPECT_EQ(draw.trees.size(), cfg.n_trees);
    for (const auto& t : draw.trees) EXPECT_NO_THROW(t.validate(4));
  }
  const Matrix draws = predict_bart_draws(post, d.x);
  const BartPrediction p = predict_bart(post, d.x);
  for (std::size_t i = 0; i < d.x.rows(); i += 17) {
    std::vector<double> col(draws.rows());
    for (std::size_t k = 0; k < draws.rows(); ++k) col[k] = draws(k, i);
    EXPECT_NEAR(p.mean[i], mean(col), 1e-9);
    EXPECT_NEAR(p.lower[i], quantile(col, 0.05), 1e-12);
    EXPECT_LE(p.lower[i], p.mean[i]);
    EXPECT_GE(p.upper[i], p.mean[i]);
    EXPECT_GT(p.sd[i], 0.0);
  }
}

TEST(Bart, FitsSignalAndRecoversNoiseLevel) {
  const Fixture d = make_data(400, 7, 0.5);
  const BartPosterior post = fit_bart(d.x, d.y, small_config(4));
  const Fixture test = make_data(300, 8, 0.5);
  const auto p = predict_bart(post, test.x);
  double sse = 0, sst = 0;
  const double fbar = mean(test.f);
  for (std::size_t i = 0; i < test.f.size(); ++i) {
    sse += (p.mean[i] - test.f[i]) * (p.mean[i] - test.f[i]);
    sst += (test.f[i] - fbar) * (test.f[i] - fbar);
  }
  EXPECT_LT(sse / sst, 0.1);
  const double sigma = mean(post.sigma_draws);
  EXPECT_GT(sigma, 0.35);
  EXPECT_LT(sigma, 0.75);
}

TEST(Bart, InclusionFavoursUsedFeatures) {
  const Fixture d = make_data(300, 11, 0.3);
  const BartPosterior post = fit_bart(d.x, d.y, small_config(6));
  const auto inc = inclusion_proportions(post);
  ASSERT_EQ(inc.size(), 4u);
  EXPECT_NEAR(std::accumulate(inc.begin(), inc.end(), 0.0), 1.0, 1e-9);
  EXPECT_GT(std::min(inc[0], inc[1]), std::max(inc[2], inc[3]));
  const auto r = variable_inclusion(post, {"a", "b", "c", "d"});
  EXPECT_EQ(r.method_id, "bart_inclusion");
  EXPECT_THROW(variable_inclusion(post, {"a"}), ValidationError);
}

}  // namespace
}  // namespace tabreg

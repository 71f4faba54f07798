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

#include "tabreg/profile.hpp"
#include "test_util.hpp"

namespace tabreg {
namespace {

// Sample skewness and excess kurtosis from k-statistics.
std::pair<double, double> k_statistic_moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double s2 = 0, s3 = 0, s4 = 0;
  for (double v : x) {
    s2 += std::pow(v - m, 2);
    s3 += std::pow(v - m, 3);
    s4 += std::pow(v - m, 4);
  }
  const double m2 = s2 / n, m3 = s3 / n, m4 = s4 / n;
  const double k2 = n / (n - 1) * m2;
  const double k3 = n * n / ((n - 1) * (n - 2)) * m3;
  const double k4 = n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3));
  return {k3 / std::pow(k2, 1.5), k4 / (k2 * k2)};
}

TEST(Summary, PublishedExample) {
  // Reference values from a standard statistics library (bias-corrected).
  const std::vector<double> x{2, 8, 0, 4, 1, 9, 9, 0};
  const SummaryStats s = summarize(x);
  EXPECT_DOUBLE_EQ(s.mean, 4.125);
  EXPECT_NEAR(*s.skewness, 0.3305821804079746, 1e-12);
  EXPECT_NEAR(*s.excess_kurtosis, -2.098602258096087, 1e-12);
  EXPECT_EQ(s.min, 0.0);
  EXPECT_EQ(s.max, 9.0);
}

TEST(Summary, MatchesKStatisticOracleOnRandomSamples) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto x = testing::random_vector(5 + seed * 7, seed, 0, 10);
    for (auto& v : x) v = v * v;  // skewed
    const auto [g1, g2] = k_statistic_moments(x);
    const SummaryStats s = summarize(x);
    EXPECT_NEAR(*s.skewness, g1, 1e-10);
    EXPECT_NEAR(*s.excess_kurtosis, g2, 1e-9);
    EXPECT_NEAR(s.sd, std::sqrt(sample_variance(x)), 1e-12);
  }
}

TEST(Summary, UndefinedMomentsAndMissingCells) {
  const SummaryStats two = summarize(std::vector<double>{1, 2});
  EXPECT_FALSE(two.skewness.has_value());
  EXPECT_FALSE(two.excess_kurtosis.has_value());
  EXPECT_EQ(classify_normality(two), Normality::non_normal);
  const SummaryStats flat = summarize(std::vector<double>{3, 3, 3, 3, 3});
  EXPECT_TRUE(flat.zero_variance);
  EXPECT_EQ(flat.sd, 0.0);
  const std::vector<double> v{1, 100, 3};
  const std::vector<CellState> st{CellState::observed, CellState::missing, CellState::imputed};
  EXPECT_DOUBLE_EQ(summarize(v, st).mean, 2.0);
  EXPECT_THROW(summarize(std::vector<double>{}), ValidationError);
}

TEST(Normality, GaussianSampleIsNormalAndExponentialIsNot) {
  Rng rng(8);
  std::normal_distribution<double> z;
  std::exponential_distribution<double> e;
  std::vector<double> g(5000), ex(5000);
  for (auto& v : g) v = z(rng);
  for (auto& v : ex) v = e(rng);
  EXPECT_EQ(classify_normality(summarize(g)), Normality::normal);
  EXPECT_EQ(classify_normality(summarize(ex)), Normality::non_normal);
}

TEST(WhoClasses, BoundariesInGrams) {
  EXPECT_EQ(who_bw_class(1499.9), WeightClass::very_low);
  EXPECT_EQ(who_bw_class(1500), WeightClass::moderately_low);
  EXPECT_EQ(who_bw_class(2499.9), WeightClass::moderately_low);
  EXPECT_EQ(who_bw_class(2500), WeightClass::normal);
  EXPECT_EQ(who_bw_class(4000), WeightClass::normal);
  EXPECT_EQ(who_bw_class(4000.1), WeightClass::high);
  EXPECT_THROW(who_bw_class(0), ValidationError);
}

TEST(HistogramProps, CountsSumToNAndEdgesAscend) {
  for (std::size_t bins : {1u, 3u, 30u}) {
    const auto x = testing::random_vector(777, bins, -5, 5);
    const Histogram h = histogram(x, bins);
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}), x.size());
    EXPECT_TRUE(std::is_sorted(h.edges.begin(), h.edges.end()));
    EXPECT_EQ(h.edges.size(), bins + 1);
  }
  const Histogram h = histogram(std::vector<double>{0, 1, 2, 3}, 3);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 1, 2}));
}

TEST(ProfileReportTest, CountsKindsAndWeightClasses) {
  std::vector<Column> cols;
  cols.push_back(testing::make_column("bw", {1400, 2000, 3000, 4500, 3500}, Kind::continuous,
                                      Role::target));
  cols.push_back(testing::make_column("a", {1, 2, 3, 4, 50}));
  cols.push_back(testing::make_column("b", {0, 1, 1, 2, 1}, Kind::ordinal));
  cols.push_back(testing::make_column("c", {7, 7, 7, 7, 7}, Kind::ordinal));
  const ProfileReport r = profile_table(Table(5, cols));
  EXPECT_EQ(r.n_features, 3u);
  EXPECT_EQ(r.n_continuous, 2u);
  EXPECT_EQ(r.n_discrete, 2u);
  EXPECT_EQ(r.n_zero_variance, 1u);
  EXPECT_EQ(r.target_weight_classes, (std::vector<std::size_t>{1, 1, 2, 1}));
  const auto& b = r.columns[2];
  EXPECT_EQ(b.frequencies, (std::vector<std::pair<long long, std::size_t>>{{0, 1}, {1, 3}, {2, 1}}));
  EXPECT_EQ(r.n_normal + r.n_non_normal, 2u);
}

}  // namespace
}  // namespace tabreg

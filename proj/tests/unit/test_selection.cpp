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
#include <map>
#include <random>

#include "tabreg/selection.hpp"
#include "tabreg/synth.hpp"
#include "test_util.hpp"

namespace tabreg {
namespace {

// ---- Independent oracles -------------------------------------------------

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

double oracle_kendall_b(const std::vector<double>& x, const std::vector<double>& y) {
  double conc = 0, disc = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        tx += 1;
      } else if (dy == 0) {
        ty += 1;
      } else if ((dx > 0) == (dy > 0)) {
        conc += 1;
      } else {
        disc += 1;
      }
    }
  }
  return (conc - disc) / std::sqrt((conc + disc + tx) * (conc + disc + ty));
}

double oracle_mi(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pa, pb;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1 / n;
    pa[a[i]] += 1 / n;
    pb[b[i]] += 1 / n;
  }
  double mi = 0;
  for (const auto& [k, p] : joint) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  return mi;
}

std::vector<int> random_codes(std::size_t n, int levels, uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> u(0, levels - 1);
  std::vector<int> v(n);
  for (auto& c : v) c = u(rng);
  return v;
}

// ---- Pairwise statistics -------------------------------------------------

TEST(Pairwise, PearsonTextbookValue) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 5, 4, 5};
  EXPECT_NEAR(pearson(x, y), 6 / std::sqrt(60.0), 1e-15);
}

TEST(Pairwise, AgreeWithOraclesOnRandomTiedData) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto x = testing::random_vector(40, seed);
    auto y = testing::random_vector(40, seed + 100);
    for (std::size_t i = 0; i < 40; ++i) {
      x[i] = std::round(4 * x[i]);  // plenty of ties
      y[i] = std::round(3 * (y[i] + 0.5 * x[i]));
    }
    EXPECT_NEAR(pearson(x, y), oracle_pearson(x, y), 1e-12);
    EXPECT_NEAR(spearman(x, y), oracle_pearson(oracle_ranks(x), oracle_ranks(y)), 1e-12);
    EXPECT_NEAR(kendall(x, y), oracle_kendall_b(x, y), 1e-12);
  }
}

TEST(Pairwise, RankStatisticsAreMonotoneInvariant) {
  const auto x = testing::random_vector(50, 1);
  const auto y = testing::random_vector(50, 2);
  std::vector<double> ex(50), cy(50);
  for (std::size_t i = 0; i < 50; ++i) {
    ex[i] = std::exp(3 * x[i]);
    cy[i] = y[i] * y[i] * y[i];
  }
  EXPECT_NEAR(spearman(x, y), spearman(ex, cy), 1e-12);
  EXPECT_NEAR(kendall(x, y), kendall(ex, cy), 1e-12);
  EXPECT_NEAR(spearman(x, ex), 1.0, 1e-12);
  EXPECT_NEAR(kendall(x, ex), 1.0, 1e-12);
}

TEST(Pairwise, MutualInformationMatchesPlugInFormula) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = random_codes(200, 4, seed);
    auto b = random_codes(200, 3, seed + 50);
    for (std::size_t i = 0; i < b.size(); i += 2) b[i] = a[i] % 3;
    EXPECT_NEAR(mutual_information(a, b), oracle_mi(a, b), 1e-12);
  }
  // Self-information is the entropy; a product design has none.
  const std::vector<int> a{0, 0, 1, 1, 2, 2, 3, 3};
  const std::vector<int> b{0, 1, 0, 1, 0, 1, 0, 1};
  EXPECT_NEAR(mutual_information(a, a), std::log(4.0), 1e-12);
  EXPECT_NEAR(mutual_information(a, b), 0.0, 1e-12);
}

TEST(Pairwise, EqualFrequencyBins) {
  const auto x = testing::random_vector(1000, 3);
  const auto bins = equal_frequency_bins(x, 10);
  std::map<int, int> counts;
  for (int b : bins) counts[b]++;
  EXPECT_EQ(counts.size(), 10u);
  for (const auto& [b, c] : counts) EXPECT_NEAR(c, 100, 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); j += 37) {
      if (x[i] < x[j]) EXPECT_LE(bins[i], bins[j]);
    }
  }
  const std::vector<double> tied{1, 1, 1, 1, 2, 3};
  const auto tb = equal_frequency_bins(tied, 3);
  EXPECT_EQ(tb[0], tb[3]);
}

TEST(Pairwise, AnovaHandExample) {
  // Groups {1,2,3}, {4,5,6}, {7,8,9}: SSB = 54 on 2 df, SSW = 6 on 6 df.
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<int> g{0, 0, 0, 1, 1, 1, 2, 2, 2};
  EXPECT_NEAR(anova_f(v, g), (54.0 / 2) / (6.0 / 6), 1e-12);
  EXPECT_TRUE(std::isnan(anova_f(v, std::vector<int>(9, 1))));
  const std::vector<double> flat{1, 1, 2, 2};
  EXPECT_TRUE(std::isinf(anova_f(flat, std::vector<int>{0, 0, 1, 1})));
}

// ---- Table selectors -----------------------------------------------------

Table signal_table(std::size_t n, uint64_t seed) {
  const Matrix x = testing::random_matrix(n, 6, seed);
  const auto eps = testing::random_vector(n, seed + 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 3 * x(i, 0) + 2 * x(i, 1) * x(i, 1) + 1.0 * x(i, 2) + 0.1 * eps[i];
  }
  return testing::make_table(x, y);
}

TEST(TableSelectors, CorrelationScoresUseAbsoluteValueAndSkipMissing) {
  Table t = signal_table(200, 4);
  const auto r = correlation_scores(t, "y", CorrelationMethod::pearson);
  EXPECT_EQ(r.entries.front().feature, "x0");
  const auto& y = t.columns()[0].values;
  const auto& x2 = t.columns()[3].values;
  EXPECT_NEAR(r.entry("x2").score, std::fabs(oracle_pearson(x2, y)), 1e-12);

  // Masking cells drops those rows only.
  Column c = t.columns()[3];
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (i % 5 == 0) {
      c.state[i] = CellState::missing;
      c.values[i] = std::nan("");
    } else {
      xs.push_back(x2[i]);
      ys.push_back(y[i]);
    }
  }
  const Table masked = t.replace_column(3, c);
  const auto rm = correlation_scores(masked, "y", CorrelationMethod::pearson);
  EXPECT_NEAR(rm.entry("x2").score, std::fabs(oracle_pearson(xs, ys)), 1e-12);
}

TEST(TableSelectors, NonlinearAwareMethodsSeeQuadraticSignal) {
  const Table t = signal_table(600, 5);
  const auto mi = mutual_information_scores(t, "y");
  const auto relief = relief_f_scores(t, "y", 10, 0, 3);
  const auto anova = anova_f_scores(t, "y");
  for (const auto* r : {&mi, &relief, &anova}) {
    const auto top = r->top(3);
    EXPECT_TRUE(std::find(top.begin(), top.end(), "x1") != top.end()) << r->method_id;
    EXPECT_TRUE(std::find(top.begin(), top.end(), "x0") != top.end()) << r->method_id;
  }
  // Pearson misses the symmetric term.
  const auto pr = correlation_scores(t, "y", CorrelationMethod::pearson);
  EXPECT_LT(pr.entry("x1").score, 0.2);
}

TEST(TableSelectors, EmbeddedScoresRankSignalsFirst) {
  const Table t = signal_table(300, 6);
  const auto lasso = embedded_scores(t, "y", EmbeddedMethod::lasso, 1);
  EXPECT_EQ(lasso.entries.front().feature, "x0");
  GbrParams p;
  p.n_iterations = 50;
  const auto gain = embedded_scores(t, "y", EmbeddedMethod::tree_gain, 1, p);
  const auto top = gain.top(3);
  std::vector<std::string> sorted(top.begin(), top.end());
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::string>{"x0", "x1", "x2"}));
}

TEST(Consensus, BordaMatchesHandCount) {
  const std::vector<std::string> u{"a", "b", "c", "d"};
  const auto r1 = make_ranking("m1", u, {4, 3, 2, 1});  // a b c d
  const auto r2 = make_ranking("m2", u, {1, 4, 3, 2});  // b c d a
  const auto r3 = make_ranking("m3", u, {2, 3, 4, 1});  // c b a d
  const auto agg = aggregate_rankings({r1, r2, r3});
  // Points: a = 3+0+1, b = 2+3+2, c = 1+2+3, d = 0+1+0.
  EXPECT_DOUBLE_EQ(agg.entry("a").score, 4);
  EXPECT_DOUBLE_EQ(agg.entry("b").score, 7);
  EXPECT_DOUBLE_EQ(agg.entry("c").score, 6);
  EXPECT_DOUBLE_EQ(agg.entry("d").score, 1);
  EXPECT_EQ(agg.top(4), (std::vector<std::string>{"b", "c", "a", "d"}));
  const auto other = make_ranking("m4", {"a", "b", "e", "d"}, {1, 2, 3, 4});
  EXPECT_THROW(aggregate_rankings({r1, other}), ValidationError);
  EXPECT_THROW(aggregate_rankings({}), ValidationError);
}

TEST(Consensus, BordaPropertyOnRandomRankings) {
  std::vector<std::string> u;
  for (int i = 0; i < 12; ++i) u.push_back("f" + std::to_string(i));
  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<SelectorRanking> rs;
    for (int m = 0; m < 5; ++m) rs.push_back(make_ranking("m", u, testing::random_vector(12, seed * 10 + m)));
    const auto agg = aggregate_rankings(rs);
    double total = 0;
    for (const auto& e : agg.entries) {
      double want = 0;
      for (const auto& r : rs) want += 12.0 - static_cast<double>(r.entry(e.feature).rank);
      EXPECT_DOUBLE_EQ(e.score, want);
      total += e.score;
    }
    EXPECT_DOUBLE_EQ(total, 5 * (12.0 * 11 / 2));
    for (std::size_t i = 1; i < agg.entries.size(); ++i) {
      EXPECT_GE(agg.entries[i - 1].score, agg.entries[i].score);
    }
  }
}

ModelFactory ols_factory() {
  ModelSpec s;
  s.kind = ModelKind::linear;
  s.linear.l2 = 1e-6;
  return make_factory(s);
}

Table linear_table(std::size_t n, uint64_t seed) {
  const Matrix x = testing::random_matrix(n, 5, seed);
  const auto e = testing::random_vector(n, seed + 9);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 3 * x(i, 3) + 1.5 * x(i, 1) + 0.05 * e[i];
  return testing::make_table(x, y);
}

TEST(Wrappers, ForwardSelectionAddsStrongestFirst) {
  const auto fs = forward_select(linear_table(150, 2), "y", ols_factory(), 3, 5, 1);
  ASSERT_EQ(fs.features.size(), 3u);
  EXPECT_EQ(fs.features[0], "x3");
  EXPECT_EQ(fs.features[1], "x1");
  EXPECT_GT(fs.cv_r2[1], 0.99);
  EXPECT_GE(fs.cv_r2[1], fs.cv_r2[0]);
  EXPECT_LT(fs.baseline_r2, 0.0 + 1e-9);
}

TEST(Wrappers, RfeKeepsSignals) {
  auto keep = rfe(linear_table(150, 3), "y", ols_factory(), 2, 2);
  std::sort(keep.begin(), keep.end());
  EXPECT_EQ(keep, (std::vector<std::string>{"x1", "x3"}));
}

TEST(Wrappers, BorutaSeparatesSignalFromNoise) {
  const Table t = linear_table(300, 4);
  GbrParams p;
  p.n_iterations = 40;
  const auto v = boruta(t, "y", p, 0.05, 30, 7);
  const auto confirmed = v.confirmed();
  EXPECT_TRUE(std::find(confirmed.begin(), confirmed.end(), "x3") != confirmed.end());
  EXPECT_TRUE(std::find(confirmed.begin(), confirmed.end(), "x1") != confirmed.end());
  EXPECT_EQ(confirmed.size(), 2u);
  for (std::size_t i = 0; i < v.features.size(); ++i) {
    EXPECT_LE(v.hits[i], v.rounds_seen[i]);
    EXPECT_LE(v.rounds_seen[i], v.n_rounds);
  }
  // Same seed, same verdicts.
  EXPECT_EQ(to_json(boruta(t, "y", p, 0.05, 30, 7)), to_json(v));
}

TEST(Wrappers, BorutaConfirmsNothingUnderPermutedLabels) {
  GbrParams p;
  p.n_iterations = 30;
  p.subsample_fraction = 0.5;
  std::size_t clean = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix x = testing::random_matrix(200, 8, 500 + seed);
    const auto y = testing::random_vector(200, 900 + seed);
    const auto v = boruta(testing::make_table(x, y), "y", p, 0.05, 20, seed);
    clean += v.confirmed().empty();
  }
  EXPECT_GE(clean, 19u);
}

}  // namespace
}  // namespace tabreg

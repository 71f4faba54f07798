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
#include <limits>
#include <set>
#include <sstream>

#include "tabreg/table.hpp"
#include "test_util.hpp"

namespace tabreg {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

CsvSchema small_schema() {
  CsvSchema s;
  ColumnMeta bw{"bw", Kind::continuous, Stage::delivery, Lineage::offspring, Role::target};
  ColumnMeta ga{"ga", Kind::continuous, Stage::delivery, Lineage::maternal};
  ColumnMeta parity{"parity", Kind::ordinal, Stage::prenatal, Lineage::maternal};
  ColumnMeta diet{"diet", Kind::nominal, Stage::prenatal, Lineage::maternal};
  s.columns = {bw, ga, parity, diet};
  return s;
}

TEST(Csv, ParsesKindsMissingTokensAndLabels) {
  std::istringstream in(
      "bw,ga,parity,diet\n"
      "2800,38.5,0,veg\n"
      "NA,39,1,\"non veg\"\n"
      "3100,,2,veg\n");
  const Table t = parse_csv(in, small_schema());
  ASSERT_EQ(t.n_rows(), 3u);
  ASSERT_EQ(t.n_cols(), 4u);
  EXPECT_FALSE(t.column("bw").present(1));
  EXPECT_TRUE(std::isnan(t.column("bw").values[1]));
  EXPECT_DOUBLE_EQ(t.column("ga").values[0], 38.5);
  EXPECT_FALSE(t.column("ga").present(2));
  EXPECT_DOUBLE_EQ(t.column("diet").values[1], 1.0);
  EXPECT_EQ(t.column("diet").meta.labels, (std::vector<std::string>{"veg", "non veg"}));
  EXPECT_FALSE(t.column("diet").meta.numeric_labels);
  EXPECT_NEAR(t.column("bw").meta.missing_fraction, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(t.missing_cells(), 2u);
  EXPECT_NEAR(t.missing_fraction(), 2.0 / 12.0, 1e-15);
  EXPECT_EQ(t.require_target(), 0u);
}

TEST(Csv, RoundTripIsExact) {
  const Matrix x = testing::random_matrix(40, 3, 9, -1e3, 1e3);
  auto y = testing::random_vector(40, 10);
  y[5] = kNan;
  const Table t = testing::make_table(x, y);
  std::ostringstream out;
  write_csv(t, out);
  std::istringstream in(out.str());
  const Table back = parse_csv(in, schema_of(t));
  for (std::size_t j = 0; j < t.n_cols(); ++j) {
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      EXPECT_EQ(t.column(j).present(r), back.column(j).present(r));
      if (t.column(j).present(r)) EXPECT_EQ(t.column(j).values[r], back.column(j).values[r]);
    }
  }
  std::ostringstream again;
  write_csv(back, again);
  EXPECT_EQ(out.str(), again.str());
}

TEST(Csv, RejectsMalformedInput) {
  const CsvSchema s = small_schema();
  std::istringstream ragged("bw,ga,parity,diet\n1,2,3\n");
  EXPECT_THROW(parse_csv(ragged, s), ValidationError);
  std::istringstream extra("bw,ga,parity,diet,zzz\n1,2,3,a,b\n");
  EXPECT_THROW(parse_csv(extra, s), ValidationError);
  std::istringstream missing_col("bw,ga,parity\n1,2,3\n");
  EXPECT_THROW(parse_csv(missing_col, s), ValidationError);
  std::istringstream bad_ordinal("bw,ga,parity,diet\n1,2,1.5,a\n");
  EXPECT_THROW(parse_csv(bad_ordinal, s), ValidationError);
  std::istringstream unterminated("bw,ga,parity,diet\n1,2,1,\"a\n");
  EXPECT_THROW(parse_csv(unterminated, s), ValidationError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv", s), ArtifactError);
}

TEST(Csv, SchemaJsonRoundTrip) {
  CsvSchema s = small_schema();
  s.columns[3].labels = {"veg", "non veg"};
  const CsvSchema back = schema_from_json(schema_to_json(s));
  ASSERT_EQ(back.columns.size(), s.columns.size());
  for (std::size_t i = 0; i < s.columns.size(); ++i) {
    EXPECT_EQ(back.columns[i].name, s.columns[i].name);
    EXPECT_EQ(back.columns[i].kind, s.columns[i].kind);
    EXPECT_EQ(back.columns[i].stage, s.columns[i].stage);
    EXPECT_EQ(back.columns[i].lineage, s.columns[i].lineage);
    EXPECT_EQ(back.columns[i].role, s.columns[i].role);
  }
  EXPECT_EQ(back.columns[3].labels, s.columns[3].labels);
}

TEST(TableInvariants, RejectsBadColumns) {
  std::vector<Column> dup{testing::make_column("a", {1, 2}), testing::make_column("a", {3, 4})};
  EXPECT_THROW(Table(2, dup), ValidationError);
  std::vector<Column> len{testing::make_column("a", {1, 2, 3})};
  EXPECT_THROW(Table(2, len), ValidationError);
  std::vector<Column> code{testing::make_column("a", {1, 2.5}, Kind::ordinal)};
  EXPECT_THROW(Table(2, code), ValidationError);
  std::vector<Column> inf{testing::make_column("a", {1, std::numeric_limits<double>::infinity()})};
  EXPECT_THROW(Table(2, inf), ValidationError);
  std::vector<Column> two_targets{testing::make_column("a", {1, 2}, Kind::continuous, Role::target),
                                  testing::make_column("b", {1, 2}, Kind::continuous, Role::target)};
  EXPECT_THROW(Table(2, two_targets).require_target(), ValidationError);
}

// Randomly tagged table; expected filter counts come from a direct scan.
TEST(Filter, TraceMatchesIndependentScan) {
  Rng rng(77);
  const std::size_t n = 50;
  std::vector<Column> cols;
  cols.push_back(testing::make_column("target", std::vector<double>(n, 1.0), Kind::continuous,
                                      Role::target));
  cols.back().meta.stage = Stage::delivery;
  std::uniform_int_distribution<int> stage(0, 2), lineage(0, 3), kind(0, 2), miss(0, 40);
  std::bernoulli_distribution text(0.5);
  for (int j = 0; j < 300; ++j) {
    const int m = miss(rng);
    std::vector<double> v(n, 1.0);
    for (int r = 0; r < m; ++r) v[static_cast<std::size_t>(r)] = kNan;
    const auto k = static_cast<Kind>(kind(rng));
    Column c = testing::make_column("c" + std::to_string(j), v, k);
    c.meta.stage = static_cast<Stage>(stage(rng));
    c.meta.lineage = static_cast<Lineage>(lineage(rng));
    if (k == Kind::nominal) {
      c.meta.labels = {text(rng) ? "x" : "7", "8"};
      c.meta.numeric_labels = c.meta.labels[0] != "x";
    }
    cols.push_back(std::move(c));
  }
  const Table t(n, cols);

  std::size_t after1 = 0, after2 = 0, after3 = 0, after4 = 0;
  for (const auto& c : cols) {
    const bool post = c.meta.stage == Stage::postnatal;
    const bool step1 = post && c.meta.lineage != Lineage::maternal;
    const bool step2 = post && c.meta.lineage == Lineage::maternal;
    std::size_t missing = 0;
    for (double v : c.values) missing += std::isnan(v);
    const bool step3 = static_cast<double>(n - missing) < 0.6 * n;
    const bool step4 = c.meta.kind == Kind::nominal && !c.meta.labels.empty() &&
                       c.meta.labels[0] == "x";
    if (step1) continue;
    ++after1;
    if (step2) continue;
    ++after2;
    if (step3) continue;
    ++after3;
    if (step4) continue;
    ++after4;
  }
  const auto [out, trace] = apply_filter_plan(t, default_filter_plan());
  EXPECT_EQ(trace.column_counts,
            (std::vector<std::size_t>{cols.size(), after1, after2, after3, after4}));
  EXPECT_EQ(out.n_cols(), after4);
  EXPECT_EQ(trace.labels.size(), 5u);
  EXPECT_NEAR(trace.missing_fractions.back(), out.missing_fraction(), 1e-15);
}

TEST(Filter, RefusesToDropTheTarget) {
  std::vector<Column> cols{testing::make_column("y", {1, 2}, Kind::continuous, Role::target),
                           testing::make_column("a", {1, 2})};
  cols[0].meta.stage = Stage::postnatal;
  cols[0].meta.lineage = Lineage::offspring;
  EXPECT_THROW(apply_filter_plan(Table(2, cols), default_filter_plan()), ValidationError);
}

TEST(Filter, PlanJsonRoundTrip) {
  const FilterPlan p = default_filter_plan();
  const FilterPlan back = filter_plan_from_json(to_json(p));
  EXPECT_EQ(to_json(back).dump(), to_json(p).dump());
  FilterPlan bad;
  FilterStep s;
  s.op = FilterStep::Op::min_observed;
  s.threshold = 1.5;
  bad.steps.push_back(s);
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Split, PartitionProperties) {
  for (std::size_t n : {2u, 10u, 801u}) {
    for (double f : {0.1, 0.2, 0.5}) {
      if (std::llround(n * f) == 0) continue;
      const auto s = split_indices(n, f, 3);
      EXPECT_EQ(s.test.size(), static_cast<std::size_t>(std::llround(n * f)));
      std::set<std::size_t> all(s.train.begin(), s.train.end());
      for (auto r : s.test) EXPECT_TRUE(all.insert(r).second);
      EXPECT_EQ(all.size(), n);
      EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
      EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
      EXPECT_EQ(s.test, split_indices(n, f, 3).test);
    }
  }
  EXPECT_THROW(split_indices(10, 0.0, 1), ValidationError);
  EXPECT_THROW(split_indices(1, 0.5, 1), ValidationError);
  EXPECT_THROW(split_indices(3, 0.01, 1), ValidationError);
}

TEST(Dataset, RequiresCompleteCells) {
  Matrix x(3, 1);
  x(0, 0) = 1;
  x(1, 0) = kNan;
  x(2, 0) = 3;
  const Table t = testing::make_table(x, {1, 2, 3});
  EXPECT_THROW(to_dataset(t, "y"), ValidationError);
  const Table ok = t.select_rows(std::vector<std::size_t>{0, 2});
  const Dataset d = to_dataset(ok, "y");
  EXPECT_EQ(d.x(1, 0), 3.0);
  EXPECT_EQ(d.y, (std::vector<double>{1, 3}));
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"x0"}));
}

TEST(Missingness, RecomputeMatchesCellCount) {
  Matrix x = testing::random_matrix(20, 4, 2);
  x(3, 1) = kNan;
  x(4, 2) = kNan;
  const Table t = testing::make_table(x, testing::random_vector(20, 3));
  const auto s = recompute_missingness(t);
  EXPECT_DOUBLE_EQ(s.dataset_fraction, 2.0 / 100.0);
  EXPECT_DOUBLE_EQ(s.table.column("x1").meta.missing_fraction, 0.05);
}

}  // namespace
}  // namespace tabreg

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

#include <filesystem>
#include <fstream>

#include "tabreg/model.hpp"
#include "test_util.hpp"

namespace tabreg {
namespace {

namespace fs = std::filesystem;

struct Data {
  Matrix x;
  std::vector<double> y;
};

Data data(std::size_t n, uint64_t seed) {
  Data d{testing::random_matrix(n, 3, seed), {}};
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.y[i] = 1.0 / 3.0 + 2 * d.x(i, 0) - d.x(i, 1) * d.x(i, 2);
  return d;
}

ModelSpec small(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  s.id = std::string(to_string(kind));
  s.gbr.n_iterations = 30;
  s.bart.n_trees = 10;
  s.bart.n_iterations = 60;
  s.bart.burn_in = 20;
  s.linear.l2 = 0.1;
  return s;
}

class ModelRoundTrip : public ::testing::TestWithParam<ModelKind> {};

TEST_P(ModelRoundTrip, JsonPreservesPredictionsExactly) {
  const Data d = data(120, 4);
  const Model m = fit_model(small(GetParam()), d.x, d.y);
  EXPECT_EQ(m.kind(), GetParam());
  EXPECT_EQ(m.n_features(), 3u);
  const auto before = predict(m, d.x);
  const Model back = model_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.id, m.id);
  EXPECT_EQ(predict(back, d.x), before);
  EXPECT_EQ(to_json(back).dump(), to_json(m).dump());

  const fs::path dir = fs::temp_directory_path() / "tabreg_model_rt";
  fs::create_directories(dir);
  save_model(m, dir / "m.json");
  EXPECT_EQ(predict(load_model(dir / "m.json"), d.x), before);
  const auto imp = feature_importance(m);
  ASSERT_EQ(imp.size(), 3u);
  for (double v : imp) EXPECT_GE(v, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Kinds, ModelRoundTrip,
                         ::testing::Values(ModelKind::linear, ModelKind::gbr, ModelKind::bart));

TEST(ModelSpecJson, RoundTripsAndRejectsUnknownKeys) {
  for (const ModelSpec& s : {tuned_gbr_spec(5), default_bart_spec(6), ridge_spec(7)}) {
    const ModelSpec back = model_spec_from_json(to_json(s));
    EXPECT_EQ(to_json(back), to_json(s));
  }
  nlohmann::json j = to_json(tuned_gbr_spec(1));
  j["params"]["depth"] = 3;
  EXPECT_THROW(model_spec_from_json(j), ValidationError);
  EXPECT_THROW(model_spec_from_json({{"kind", "forest"}}), ValidationError);
  EXPECT_THROW(model_spec_from_json({{"kind", "gbr"}, {"params", {{"learning_rate", 0}}}}),
               ValidationError);
}

TEST(ModelSpecJson, ReferencePresets) {
  const ModelSpec g = tuned_gbr_spec(0);
  EXPECT_EQ(g.gbr.n_iterations, 1748u);
  EXPECT_EQ(g.gbr.max_depth, 4u);
  EXPECT_DOUBLE_EQ(g.gbr.learning_rate, 0.0075);
  const ModelSpec b = default_bart_spec(0);
  EXPECT_EQ(b.bart.n_trees, 100u);
  EXPECT_EQ(b.bart.n_iterations, 1200u);
  EXPECT_EQ(b.bart.retained_draws(), 1000u);
  EXPECT_TRUE(ridge_spec(0).linear.cv_l1_ratio.has_value());
}

TEST(ModelArtifacts, RejectsForeignOrBrokenFiles) {
  const fs::path dir = fs::temp_directory_path() / "tabreg_model_bad";
  fs::create_directories(dir);
  EXPECT_THROW(load_model(dir / "absent.json"), ArtifactError);
  std::ofstream(dir / "junk.json") << "{not json";
  EXPECT_THROW(load_model(dir / "junk.json"), ArtifactError);
  const Data d = data(60, 1);
  nlohmann::json j = to_json(fit_model(small(ModelKind::gbr), d.x, d.y));
  j["format"] = "other";
  EXPECT_THROW(model_from_json(j), ArtifactError);
  j["format"] = "tabreg-model";
  j["version"] = 99;
  EXPECT_THROW(model_from_json(j), ArtifactError);
}

TEST(ModelFactory, MatchesDirectFit) {
  const Data d = data(80, 2);
  const ModelSpec s = small(ModelKind::gbr);
  const Model a = make_factory(s)(d.x, d.y);
  EXPECT_EQ(predict(a, d.x), predict(fit_model(s, d.x, d.y), d.x));
}

}  // namespace
}  // namespace tabreg

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

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tabreg/bart.hpp"
#include "tabreg/common.hpp"
#include "tabreg/linear.hpp"
#include "tabreg/tree.hpp"

namespace tabreg {

enum class ModelKind { linear, gbr, bart };
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct LinearSpec {
  double l1 = 0.0;
  double l2 = 0.0;
  // When set, the total penalty is chosen by k-fold CV at this l1 share and
  // l1/l2 above are ignored.
  std::optional<double> cv_l1_ratio;
  std::size_t cv_folds = 5;
  uint64_t seed = 0;
};

struct ModelSpec {
  std::string id;
  ModelKind kind = ModelKind::gbr;
  LinearSpec linear;
  GbrParams gbr;
  BartConfig bart;
};

// Reference configurations: boosted trees with 1,748 iterations, depth 4,
// learning rate 0.0075 and a 100-tree BART run for 1,200 iterations.
ModelSpec tuned_gbr_spec(uint64_t seed);
ModelSpec default_bart_spec(uint64_t seed);
ModelSpec ridge_spec(uint64_t seed);

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

struct Model {
  std::string id;
  std::variant<LinearModel, TreeEnsemble, BartPosterior> fit;

  ModelKind kind() const;
  std::size_t n_features() const;
};

Model fit_model(const ModelSpec& spec, const Matrix& x, std::span<const double> y);
// BART returns the posterior mean.
std::vector<double> predict(const Model& model, const Matrix& x);
// Non-negative per-feature importance: |standardized coefficient| for linear
// models, summed split gain for boosted trees, inclusion share for BART.
std::vector<double> feature_importance(const Model& model);

using ModelFactory = std::function<Model(const Matrix&, std::span<const double>)>;
ModelFactory make_factory(ModelSpec spec);

// Versioned JSON ("tabreg-model", version 1); trees are stored as parallel
// node arrays. Doubles round-trip exactly.
nlohmann::json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace tabreg

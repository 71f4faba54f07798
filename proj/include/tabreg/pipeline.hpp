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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabreg/impute.hpp"
#include "tabreg/model.hpp"
#include "tabreg/synth.hpp"
#include "tabreg/table.hpp"

namespace tabreg {

// Where the raw table comes from: a named generator preset, an explicit
// cohort spec, or a CSV file with its schema.
struct InputSettings {
  std::string preset;  // wide-cohort | friedman1 | mar | planted; empty otherwise
  std::optional<CohortSpec> cohort;
  std::filesystem::path csv;
  std::filesystem::path schema;
  std::size_t n_rows = 0;  // preset override; 0 keeps the preset size
  double noise_sd = 1.0;   // friedman1 only
};

struct ImputeSettings {
  std::string discrete = "knn";    // knn | none
  std::string continuous = "mice";  // mice | mean | none
  KnnConfig knn;
  MiceConfig mice;
};

struct SelectSettings {
  std::vector<std::string> methods;
  std::size_t k = 20;
  std::size_t mi_bins = 10;
  std::size_t relief_neighbors = 10;
  std::size_t relief_samples = 0;
  std::size_t permutation_repeats = 5;
  // Boosted trees behind tree_gain, permutation, shap and Boruta.
  GbrParams selector_model;
  bool boruta = false;
  std::size_t boruta_rounds = 50;
  double boruta_alpha = 0.05;
  // Row subsample per boosting iteration for the Boruta model, which
  // otherwise copies selector_model.
  double boruta_subsample = 0.5;
};

struct EvaluationSettings {
  double test_fraction = kDefaultTestFraction;
  std::size_t hist_bins = 30;
  std::size_t pdp_points = 50;
  std::size_t pdp_features = 5;
  std::size_t draw_stride = 10;
  std::size_t cv_folds = 0;  // 0 skips cross-validation
  // Extra rows of the comparison table; "consensus" is always included.
  std::vector<std::string> comparison_selectors;
};

struct PipelineConfig {
  uint64_t seed = 20240601;
  std::filesystem::path output_dir = "tabreg_out";
  InputSettings input;
  FilterPlan filter;
  ImputeSettings impute;
  SelectSettings select;
  std::vector<ModelSpec> models;
  EvaluationSettings evaluation;

  void validate() const;
};

// Selector ids accepted in SelectSettings::methods.
const std::vector<std::string>& known_selectors();

PipelineConfig default_pipeline_config();

// Every ranking named in `settings.methods`, in that order. Permutation and
// SHAP scores share one boosted-tree fit.
std::vector<SelectorRanking> compute_rankings(const SelectSettings& settings, const Table& train,
                                              const std::string& target, uint64_t seed);
nlohmann::json to_json(const PipelineConfig& config);
// Strict: unknown keys, unknown selectors and bad values are ValidationErrors.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// FNV-1a of the canonical config JSON with output_dir removed.
std::string config_hash(const PipelineConfig& config);
// Per-stage seed: derive_seed(master seed, stage name).
uint64_t stage_seed(const PipelineConfig& config, std::string_view stage);

enum class PipelineStage { input, filter, profile, impute, select, train, explain, report };

inline constexpr PipelineStage kStageOrder[] = {
    PipelineStage::input,  PipelineStage::filter, PipelineStage::profile,
    PipelineStage::impute, PipelineStage::select, PipelineStage::train,
    PipelineStage::explain, PipelineStage::report};

std::string_view stage_name(PipelineStage s);
PipelineStage parse_pipeline_stage(std::string_view s);
// Subdirectory of output_dir holding the stage's artifacts, e.g. "04_select".
std::string stage_dir_name(PipelineStage s);

// A stage that failed after validation. error.json in output_dir names it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Runs one stage from the on-disk artifacts of its upstream stages and writes
// its own artifacts plus manifest.json. Failures become StageError.
void run_stage(const PipelineConfig& config, PipelineStage stage);
// Validates the config, then runs every stage in order.
void run_pipeline(const PipelineConfig& config);

// manifest.json of a finished stage; ArtifactError when absent, produced by a
// different config, or when a listed file no longer matches its hash.
nlohmann::json verify_stage(const PipelineConfig& config, PipelineStage stage);

}  // namespace tabreg

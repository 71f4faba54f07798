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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabreg/table.hpp"

namespace tabreg {

// Contribution of one signal feature to the target, in target units:
//   linear       a * (x - b)
//   threshold    a * [x > b]
//   nonmonotone  -a * ((x - b) / c)^2
//   saturating   a * tanh((x - b) / c)
//   interaction  a * ((x - b) / c) * ((partner - partner mean) / partner sd)
enum class EffectKind { linear, threshold, nonmonotone, saturating, interaction };
std::string_view to_string(EffectKind k);
EffectKind parse_effect_kind(std::string_view s);

struct Effect {
  EffectKind kind = EffectKind::linear;
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
  std::string partner;  // interaction only

  // `partner_z` is the standardized partner value (ignored unless interaction).
  double operator()(double x, double partner_z = 0.0) const;
};

struct SignalFeature {
  std::string name;
  double mean = 0.0;
  double sd = 1.0;
  double lo = -1e300;  // values are clipped to [lo, hi]
  double hi = 1e300;
  Effect effect;
  Stage stage = Stage::prenatal;
  Lineage lineage = Lineage::maternal;
  double missing_rate = 0.0;  // MCAR, per cell
};

enum class Mechanism { mcar, mar };

struct ColumnBlock {
  std::string prefix;  // columns are named prefix0, prefix1, ...
  std::size_t count = 0;
  Kind kind = Kind::continuous;
  // Nominal columns: word labels instead of numeric ones.
  bool text_labels = false;
  Stage stage = Stage::prenatal;
  Lineage lineage = Lineage::maternal;
  // Loading range on the shared latent factors; 0 gives independent columns.
  double loading_min = 0.0;
  double loading_max = 0.0;
  Mechanism mechanism = Mechanism::mcar;
  std::string mar_driver;  // a fully observed signal or earlier column
  double mar_strength = 1.5;
  // Per-cell rate (Bernoulli), used when missing_cells is 0.
  double missing_rate = 0.0;
  // Exact total of masked cells across the block. Each column gets a count
  // between ceil-ish(rate_min * n) and floor(rate_max * n).
  std::size_t missing_cells = 0;
  double rate_min = 0.0;
  double rate_max = 0.0;
  // Keep the pre-mask values in the ground truth.
  bool record_truth = true;
};

struct CohortSpec {
  std::size_t n_rows = 1000;
  uint64_t seed = 0;
  std::string target_name = "y";
  Stage target_stage = Stage::delivery;
  Lineage target_lineage = Lineage::offspring;
  double target_mean = 0.0;
  double noise_sd = 1.0;
  double clip_min = -1e300;
  std::size_t n_factors = 8;
  std::vector<SignalFeature> signals;
  std::vector<ColumnBlock> blocks;

  void validate() const;
};

struct GroundTruth {
  std::vector<double> noiseless_target;  // before noise and clipping
  std::vector<std::string> signal_features;
  std::vector<SignalFeature> signals;
  // Pre-mask values of recorded columns.
  std::map<std::string, std::vector<double>> true_values;
  // Column name -> block prefix ("signal" / "target" for the others).
  std::map<std::string, std::string> block_of;

  // Sum of the planted effects of `feature` at value x with the partner at
  // its mean (additive part only).
  double effect(const std::string& feature, double x) const;
};

struct Cohort {
  Table table;
  GroundTruth truth;
};

Cohort generate(const CohortSpec& spec);

// 10 uniform features, y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 + noise.
Cohort friedman1(std::size_t n_rows, double noise_sd, uint64_t seed);
double friedman1_mean();  // analytic E[y] under uniform inputs

// ---- Presets -----------------------------------------------------------

inline constexpr const char* kWideCohortTarget = "f1_bw";

// 800 rows x 5,979 tagged columns. The default filter plan keeps 852 columns
// (the target, 304 continuous and 547 discrete features) along the
// 5,979 -> 1,122 -> 886 -> 867 -> 852 trajectory; overall missingness is
// 2,265,802 / 4,783,200 cells and 29,786 / 681,600 after filtering.
CohortSpec wide_cohort_spec(uint64_t seed);
// Ten latent-correlated continuous columns with MAR gaps driven by a fully
// observed column.
CohortSpec mar_spec(std::size_t n_rows, double rate, uint64_t seed);
// Independent signal features with mixed effect shapes among decoys.
CohortSpec planted_spec(std::size_t n_rows, std::size_t n_signal, std::size_t n_decoys,
                        uint64_t seed);

nlohmann::json to_json(const CohortSpec& spec);
CohortSpec cohort_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GroundTruth& truth);
// Long CSV of masked cells: column,row,value.
void write_masked_truth_csv(const Cohort& cohort, const std::filesystem::path& path);

}  // namespace tabreg

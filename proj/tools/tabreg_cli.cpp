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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabreg/pipeline.hpp"
#include "tabreg/synth.hpp"

namespace {

namespace fs = std::filesystem;
using tabreg::PipelineConfig;
using tabreg::PipelineStage;

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kStageFailure = 3;

struct Common {
  std::string config;
  std::string output_dir;
  std::size_t threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "Pipeline config JSON (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--output-dir", c.output_dir,
                  "Artifact directory; overrides TABREG_OUTPUT_DIR and the config");
  cmd->add_option("-t,--threads", c.threads, "Worker cap (0 = all cores); results do not change");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? tabreg::default_pipeline_config()
                                        : tabreg::load_pipeline_config(c.config);
  if (const char* env = std::getenv("TABREG_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
  if (c.threads > 0) tabreg::set_max_threads(c.threads);
  cfg.validate();
  return cfg;
}

int write_synthetic(const std::string& preset, uint64_t seed, std::size_t rows, double noise,
                    const fs::path& out) {
  tabreg::Cohort cohort;
  if (preset == "wide-cohort") {
    cohort = tabreg::generate(tabreg::wide_cohort_spec(seed));
  } else if (preset == "friedman1") {
    cohort = tabreg::friedman1(rows ? rows : 1000, noise, seed);
  } else if (preset == "mar") {
    cohort = tabreg::generate(tabreg::mar_spec(rows ? rows : 2000, 0.3, seed));
  } else if (preset == "planted") {
    cohort = tabreg::generate(tabreg::planted_spec(rows ? rows : 1000, 10, 200, seed));
  } else {
    throw tabreg::ValidationError("unknown preset '" + preset + "'");
  }
  fs::create_directories(out);
  tabreg::write_csv(cohort.table, out / "data.csv");
  std::ofstream(out / "schema.json", std::ios::binary)
      << tabreg::schema_to_json(tabreg::schema_of(cohort.table)).dump(2) << '\n';
  std::ofstream(out / "truth.json", std::ios::binary)
      << tabreg::to_json(cohort.truth).dump(2) << '\n';
  tabreg::write_masked_truth_csv(cohort, out / "masked_truth.csv");
  std::cout << "wrote " << cohort.table.n_rows() << " x " << cohort.table.n_cols() << " table to "
            << out.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tabreg: tabular regression pipeline (filter, profile, impute, select, train, explain, "
      "report).\n"
      "Exit codes: 0 success, 2 invalid input or config, 3 stage failure.\n"
      "Environment: TABREG_OUTPUT_DIR overrides the configured output directory."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tabreg 1.0.0");

  Common common;

  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic cohort. With --preset and --out, writes it standalone; "
      "otherwise runs the pipeline input stage.");
  std::string preset;
  uint64_t seed = 1;
  std::size_t rows = 0;
  double noise = 1.0;
  std::string synth_out;
  add_common(synth, common);
  synth->add_option("--preset", preset, "wide-cohort | friedman1 | mar | planted");
  synth->add_option("--seed", seed, "Generator seed (standalone mode)");
  synth->add_option("--rows", rows, "Row count for friedman1, mar and planted");
  synth->add_option("--noise-sd", noise, "friedman1 noise standard deviation");
  synth->add_option("--out", synth_out, "Directory for data.csv, schema.json and truth.json");

  struct StageCmd {
    PipelineStage stage;
    const char* help;
  };
  const StageCmd stage_cmds[] = {
      {PipelineStage::filter, "Apply the column filter plan"},
      {PipelineStage::profile, "Profile the filtered table"},
      {PipelineStage::impute, "Impute discrete (KNN) and continuous (MICE) gaps"},
      {PipelineStage::select, "Rank features with every selector and build the consensus"},
      {PipelineStage::train, "Fit the configured models on the selected features"},
      {PipelineStage::explain, "SHAP attributions and partial dependence curves"},
      {PipelineStage::report, "Metrics, residual diagnostics, comparison table and bundle"},
  };
  std::vector<std::pair<CLI::App*, PipelineStage>> stage_apps;
  for (const auto& s : stage_cmds) {
    auto* cmd = app.add_subcommand(std::string(tabreg::stage_name(s.stage)), s.help);
    add_common(cmd, common);
    stage_apps.emplace_back(cmd, s.stage);
  }

  auto* run = app.add_subcommand("run", "Run every stage in order");
  add_common(run, common);

  auto* config_cmd = app.add_subcommand("config", "Print the default pipeline config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (config_cmd->parsed()) {
      std::cout << tabreg::to_json(tabreg::default_pipeline_config()).dump(2) << '\n';
      return kOk;
    }
    if (synth->parsed()) {
      if (!preset.empty() || !synth_out.empty()) {
        if (preset.empty() || synth_out.empty()) {
          throw tabreg::ValidationError("standalone synth needs both --preset and --out");
        }
        return write_synthetic(preset, seed, rows, noise, synth_out);
      }
      const PipelineConfig cfg = resolve(common);
      tabreg::run_stage(cfg, PipelineStage::input);
      std::cout << "input stage written to " << cfg.output_dir.string() << '\n';
      return kOk;
    }
    if (run->parsed()) {
      const PipelineConfig cfg = resolve(common);
      tabreg::run_pipeline(cfg);
      std::cout << "pipeline finished; artifacts in " << cfg.output_dir.string() << '\n';
      return kOk;
    }
    for (const auto& [cmd, stage] : stage_apps) {
      if (!cmd->parsed()) continue;
      const PipelineConfig cfg = resolve(common);
      tabreg::run_stage(cfg, stage);
      std::cout << tabreg::stage_name(stage) << " stage written to "
                << (cfg.output_dir / tabreg::stage_dir_name(stage)).string() << '\n';
      return kOk;
    }
  } catch (const tabreg::StageError& e) {
    std::cerr << "error: stage " << e.stage() << " failed: " << e.what() << '\n';
    return kStageFailure;
  } catch (const tabreg::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const tabreg::ArtifactError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStageFailure;
  }
  return kOk;
}

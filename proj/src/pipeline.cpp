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

#include "tabreg/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "tabreg/evaluation.hpp"
#include "tabreg/explain.hpp"
#include "tabreg/profile.hpp"
#include "tabreg/selection.hpp"
#include "tabreg/svg.hpp"

namespace tabreg {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- Config ----------------------------------------------------------------

const std::vector<std::string>& known_selectors() {
  static const std::vector<std::string> ids{
      "pearson", "spearman", "kendall", "mutual_information", "anova_f", "relief_f",
      "tree_gain", "lasso", "ridge", "elastic_net", "permutation", "shap"};
  return ids;
}

namespace {

const std::vector<std::string> kPresets{"wide-cohort", "friedman1", "mar", "planted"};

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!j.is_object()) throw ValidationError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

bool safe_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

json gbr_json(const GbrParams& p) {
  ModelSpec s;
  s.kind = ModelKind::gbr;
  s.gbr = p;
  return to_json(s).at("params");
}

GbrParams gbr_from(const json& params) {
  return model_spec_from_json({{"id", "selector"}, {"kind", "gbr"}, {"params", params}}).gbr;
}

}  // namespace

void PipelineConfig::validate() const {
  const bool has_csv = !input.csv.empty();
  const bool has_preset = !input.preset.empty();
  if (static_cast<int>(has_csv) + static_cast<int>(has_preset) + static_cast<int>(input.cohort.has_value()) != 1) {
    throw ValidationError("config.input: give exactly one of preset, cohort or csv");
  }
  if (has_csv && input.schema.empty()) throw ValidationError("config.input: csv needs a schema");
  if (has_preset && std::find(kPresets.begin(), kPresets.end(), input.preset) == kPresets.end()) {
    throw ValidationError("config.input: unknown preset '" + input.preset + "'");
  }
  if (input.preset == "wide-cohort" && input.n_rows != 0) {
    throw ValidationError("config.input: the wide-cohort preset has a fixed size");
  }
  if (!(input.noise_sd >= 0.0)) throw ValidationError("config.input: noise_sd must be >= 0");
  if (input.cohort) input.cohort->validate();
  filter.validate();
  if (impute.discrete != "knn" && impute.discrete != "none") {
    throw ValidationError("config.impute: discrete must be knn or none");
  }
  if (impute.continuous != "mice" && impute.continuous != "mean" && impute.continuous != "none") {
    throw ValidationError("config.impute: continuous must be mice, mean or none");
  }
  if (impute.knn.k < 1) throw ValidationError("config.impute: knn_k must be >= 1");
  impute.mice.validate();
  if (select.methods.empty()) throw ValidationError("config.select: methods must be non-empty");
  std::set<std::string> seen;
  for (const auto& m : select.methods) {
    const auto& ids = known_selectors();
    if (std::find(ids.begin(), ids.end(), m) == ids.end()) {
      throw ValidationError("config.select: unknown selector '" + m + "'");
    }
    if (!seen.insert(m).second) throw ValidationError("config.select: duplicate selector '" + m + "'");
  }
  if (select.k < 1) throw ValidationError("config.select: k must be >= 1");
  if (select.mi_bins < 2) throw ValidationError("config.select: mi_bins must be >= 2");
  if (select.relief_neighbors < 1) throw ValidationError("config.select: relief_neighbors must be >= 1");
  if (select.permutation_repeats < 1) {
    throw ValidationError("config.select: permutation_repeats must be >= 1");
  }
  select.selector_model.validate();
  if (select.boruta_rounds < 1) throw ValidationError("config.select: boruta_rounds must be >= 1");
  if (!(select.boruta_alpha > 0.0 && select.boruta_alpha < 1.0)) {
    throw ValidationError("config.select: boruta_alpha must be in (0, 1)");
  }
  if (!(select.boruta_subsample > 0.0 && select.boruta_subsample <= 1.0)) {
    throw ValidationError("config.select: boruta subsample must be in (0, 1]");
  }
  if (models.empty()) throw ValidationError("config.models: at least one model is required");
  std::set<std::string> ids;
  for (const auto& m : models) {
    if (!safe_id(m.id)) throw ValidationError("config.models: invalid model id '" + m.id + "'");
    if (!ids.insert(m.id).second) throw ValidationError("config.models: duplicate id '" + m.id + "'");
  }
  const auto& e = evaluation;
  if (!(e.test_fraction > 0.0 && e.test_fraction < 1.0)) {
    throw ValidationError("config.evaluation: test_fraction must be in (0, 1)");
  }
  if (e.hist_bins < 1) throw ValidationError("config.evaluation: hist_bins must be >= 1");
  if (e.pdp_points < 2) throw ValidationError("config.evaluation: pdp_points must be >= 2");
  if (e.draw_stride < 1) throw ValidationError("config.evaluation: draw_stride must be >= 1");
  if (e.cv_folds == 1) throw ValidationError("config.evaluation: cv_folds must be 0 or >= 2");
  for (const auto& s : e.comparison_selectors) {
    if (s != "consensus" && std::find(select.methods.begin(), select.methods.end(), s) ==
                                select.methods.end()) {
      throw ValidationError("config.evaluation: comparison selector '" + s +
                            "' is not among select.methods");
    }
  }
}

PipelineConfig default_pipeline_config() {
  PipelineConfig c;
  c.input.preset = "wide-cohort";
  c.filter = default_filter_plan();
  c.impute.mice.max_predictors = 25;
  c.select.methods = {"pearson",  "spearman",  "mutual_information", "relief_f",
                      "tree_gain", "lasso", "permutation", "shap"};
  c.select.selector_model.n_iterations = 200;
  c.select.selector_model.max_depth = 3;
  c.select.selector_model.learning_rate = 0.1;
  c.models = {default_bart_spec(0), tuned_gbr_spec(0), ridge_spec(0)};
  c.evaluation.comparison_selectors = {"shap", "pearson"};
  return c;
}

json to_json(const PipelineConfig& c) {
  json input = json::object();
  if (!c.input.preset.empty()) input["preset"] = c.input.preset;
  if (c.input.cohort) input["cohort"] = to_json(*c.input.cohort);
  if (!c.input.csv.empty()) {
    input["csv"] = c.input.csv.generic_string();
    input["schema"] = c.input.schema.generic_string();
  }
  if (c.input.n_rows != 0) input["n_rows"] = c.input.n_rows;
  if (c.input.preset == "friedman1") input["noise_sd"] = c.input.noise_sd;

  json models = json::array();
  for (const auto& m : c.models) models.push_back(to_json(m));
  json mice = to_json(c.impute.mice);
  mice.erase("seed");
  return {
      {"seed", c.seed},
      {"output_dir", c.output_dir.generic_string()},
      {"input", std::move(input)},
      {"filter", to_json(c.filter)},
      {"impute",
       {{"discrete", c.impute.discrete},
        {"continuous", c.impute.continuous},
        {"knn_k", c.impute.knn.k},
        {"mice", std::move(mice)}}},
      {"select",
       {{"methods", c.select.methods},
        {"k", c.select.k},
        {"mi_bins", c.select.mi_bins},
        {"relief_neighbors", c.select.relief_neighbors},
        {"relief_samples", c.select.relief_samples},
        {"permutation_repeats", c.select.permutation_repeats},
        {"selector_model", gbr_json(c.select.selector_model)},
        {"boruta",
         {{"enabled", c.select.boruta},
          {"rounds", c.select.boruta_rounds},
          {"alpha", c.select.boruta_alpha},
          {"subsample", c.select.boruta_subsample}}}}},
      {"models", std::move(models)},
      {"evaluation",
       {{"test_fraction", c.evaluation.test_fraction},
        {"hist_bins", c.evaluation.hist_bins},
        {"pdp_points", c.evaluation.pdp_points},
        {"pdp_features", c.evaluation.pdp_features},
        {"draw_stride", c.evaluation.draw_stride},
        {"cv_folds", c.evaluation.cv_folds},
        {"comparison_selectors", c.evaluation.comparison_selectors}}}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c = default_pipeline_config();
  try {
    check_keys(j, {"$schema", "seed", "output_dir", "input", "filter", "impute", "select", "models",
                   "evaluation"},
               "config");
    c.seed = j.value("seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("input")) {
      const json& in = j.at("input");
      check_keys(in, {"preset", "cohort", "csv", "schema", "n_rows", "noise_sd"}, "config.input");
      c.input = InputSettings{};
      c.input.preset = in.value("preset", std::string{});
      if (in.contains("cohort")) c.input.cohort = cohort_spec_from_json(in.at("cohort"));
      if (in.contains("csv")) c.input.csv = in.at("csv").get<std::string>();
      if (in.contains("schema")) c.input.schema = in.at("schema").get<std::string>();
      c.input.n_rows = in.value("n_rows", std::size_t{0});
      c.input.noise_sd = in.value("noise_sd", 1.0);
    }
    if (j.contains("filter")) c.filter = filter_plan_from_json(j.at("filter"));
    if (j.contains("impute")) {
      const json& im = j.at("impute");
      check_keys(im, {"discrete", "continuous", "knn_k", "mice"}, "config.impute");
      c.impute.discrete = im.value("discrete", c.impute.discrete);
      c.impute.continuous = im.value("continuous", c.impute.continuous);
      c.impute.knn.k = im.value("knn_k", c.impute.knn.k);
      if (im.contains("mice")) {
        check_keys(im.at("mice"), {"n_iterations", "n_imputations", "conditional_model",
                                   "pmm_donors", "ridge", "max_predictors"},
                   "config.impute.mice");
        c.impute.mice = mice_config_from_json(im.at("mice"));
      }
    }
    if (j.contains("select")) {
      const json& s = j.at("select");
      check_keys(s, {"methods", "k", "mi_bins", "relief_neighbors", "relief_samples",
                     "permutation_repeats", "selector_model", "boruta"},
                 "config.select");
      if (s.contains("methods")) c.select.methods = s.at("methods").get<std::vector<std::string>>();
      c.select.k = s.value("k", c.select.k);
      c.select.mi_bins = s.value("mi_bins", c.select.mi_bins);
      c.select.relief_neighbors = s.value("relief_neighbors", c.select.relief_neighbors);
      c.select.relief_samples = s.value("relief_samples", c.select.relief_samples);
      c.select.permutation_repeats = s.value("permutation_repeats", c.select.permutation_repeats);
      if (s.contains("selector_model")) c.select.selector_model = gbr_from(s.at("selector_model"));
      if (s.contains("boruta")) {
        const json& b = s.at("boruta");
        check_keys(b, {"enabled", "rounds", "alpha", "subsample"}, "config.select.boruta");
        c.select.boruta = b.value("enabled", c.select.boruta);
        c.select.boruta_rounds = b.value("rounds", c.select.boruta_rounds);
        c.select.boruta_alpha = b.value("alpha", c.select.boruta_alpha);
        c.select.boruta_subsample = b.value("subsample", c.select.boruta_subsample);
      }
    }
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(model_spec_from_json(m));
    }
    if (j.contains("evaluation")) {
      const json& e = j.at("evaluation");
      check_keys(e, {"test_fraction", "hist_bins", "pdp_points", "pdp_features", "draw_stride",
                     "cv_folds", "comparison_selectors"},
                 "config.evaluation");
      auto& ev = c.evaluation;
      ev.test_fraction = e.value("test_fraction", ev.test_fraction);
      ev.hist_bins = e.value("hist_bins", ev.hist_bins);
      ev.pdp_points = e.value("pdp_points", ev.pdp_points);
      ev.pdp_features = e.value("pdp_features", ev.pdp_features);
      ev.draw_stride = e.value("draw_stride", ev.draw_stride);
      ev.cv_folds = e.value("cv_folds", ev.cv_folds);
      if (e.contains("comparison_selectors")) {
        ev.comparison_selectors = e.at("comparison_selectors").get<std::vector<std::string>>();
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path.string() + "': " + e.what());
  }
  return pipeline_config_from_json(j);
}

std::string config_hash(const PipelineConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  return hex64(fnv1a64(j.dump()));
}

uint64_t stage_seed(const PipelineConfig& config, std::string_view stage) {
  return derive_seed(config.seed, stage);
}

std::string_view stage_name(PipelineStage s) {
  switch (s) {
    case PipelineStage::input: return "input";
    case PipelineStage::filter: return "filter";
    case PipelineStage::profile: return "profile";
    case PipelineStage::impute: return "impute";
    case PipelineStage::select: return "select";
    case PipelineStage::train: return "train";
    case PipelineStage::explain: return "explain";
    case PipelineStage::report: return "report";
  }
  return "input";
}

PipelineStage parse_pipeline_stage(std::string_view s) {
  for (auto st : kStageOrder) {
    if (stage_name(st) == s) return st;
  }
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

std::string stage_dir_name(PipelineStage s) {
  const auto index = static_cast<int>(s);
  return std::string(1, '0') + std::to_string(index) + "_" + std::string(stage_name(s));
}

// ---- Artifacts -------------------------------------------------------------

namespace {

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read artifact '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a64(bytes));
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing artifact '" + path.string() + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ArtifactError("malformed artifact '" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

fs::path stage_path(const PipelineConfig& c, PipelineStage s) {
  return c.output_dir / stage_dir_name(s);
}

// Collects the files a stage writes and seals them in manifest.json.
class StageOutput {
 public:
  StageOutput(const PipelineConfig& config, PipelineStage stage)
      : config_(config), stage_(stage), dir_(stage_path(config, stage)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }
  fs::path file(const std::string& name) {
    names_.insert(name);
    const fs::path p = dir_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }
  void json_file(const std::string& name, const json& j) { write_json(file(name), j); }
  void seed(const std::string& name, uint64_t v) { seeds_[name] = v; }
  void upstream(PipelineStage s, const json& manifest) {
    upstream_[std::string(stage_name(s))] = hex64(fnv1a64(manifest.dump()));
  }

  void seal() {
    json files = json::object();
    for (const auto& n : names_) files[n] = file_hash(dir_ / n);
    json manifest{{"format", "tabreg-manifest"},
                  {"version", 1},
                  {"stage", stage_name(stage_)},
                  {"config_hash", config_hash(config_)},
                  {"seeds", seeds_},
                  {"upstream", upstream_},
                  {"files", std::move(files)}};
    write_json(dir_ / "manifest.json", manifest);
  }

 private:
  const PipelineConfig& config_;
  PipelineStage stage_;
  fs::path dir_;
  std::set<std::string> names_;
  json seeds_ = json::object();
  json upstream_ = json::object();
};

std::string target_of(const Table& t) {
  return t.column(t.require_target()).meta.name;
}

Table load_table(const fs::path& dir, const std::string& csv) {
  return load_csv(dir / csv, load_schema(dir / "schema.json"));
}

void write_table(StageOutput& out, const Table& t, const std::string& csv) {
  write_csv(t, out.file(csv));
  write_json(out.file("schema.json"), schema_to_json(schema_of(t)));
}

SplitIndices read_split(const fs::path& dir) {
  const json j = read_json(dir / "split.json");
  SplitIndices s;
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.test = j.at("test").get<std::vector<std::size_t>>();
  return s;
}

std::vector<std::string> read_consensus(const fs::path& dir) {
  return read_json(dir / "consensus.json").at("features").get<std::vector<std::string>>();
}

std::vector<std::size_t> feature_columns(const Dataset& d, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    const auto it = std::find(d.feature_names.begin(), d.feature_names.end(), n);
    if (it == d.feature_names.end()) throw ArtifactError("feature '" + n + "' not in data");
    idx.push_back(static_cast<std::size_t>(it - d.feature_names.begin()));
  }
  return idx;
}

ModelSpec seeded(ModelSpec spec, uint64_t train_seed) {
  const uint64_t s = derive_seed(train_seed, spec.id);
  spec.linear.seed = s;
  spec.gbr.seed = s;
  spec.bart.seed = s;
  return spec;
}

// ---- Stages ----------------------------------------------------------------

Cohort make_cohort(const PipelineConfig& c, uint64_t seed) {
  const InputSettings& in = c.input;
  if (in.cohort) {
    CohortSpec spec = *in.cohort;
    spec.seed = seed;
    return generate(spec);
  }
  if (in.preset == "friedman1") return friedman1(in.n_rows ? in.n_rows : 1000, in.noise_sd, seed);
  if (in.preset == "mar") return generate(mar_spec(in.n_rows ? in.n_rows : 2000, 0.3, seed));
  if (in.preset == "planted") return generate(planted_spec(in.n_rows ? in.n_rows : 1000, 10, 200, seed));
  return generate(wide_cohort_spec(seed));
}

void stage_input(const PipelineConfig& c) {
  StageOutput out(c, PipelineStage::input);
  Table table;
  if (!c.input.csv.empty()) {
    table = load_csv(c.input.csv, load_schema(c.input.schema));
  } else {
    const uint64_t seed = stage_seed(c, "input");
    out.seed("generator", seed);
    Cohort cohort = make_cohort(c, seed);
    out.json_file("truth.json", to_json(cohort.truth));
    write_masked_truth_csv(cohort, out.file("masked_truth.csv"));
    table = std::move(cohort.table);
  }
  target_of(table);
  write_table(out, table, "data.csv");
  out.seal();
}

void stage_filter(const PipelineConfig& c) {
  const fs::path in_dir = stage_path(c, PipelineStage::input);
  const json up = verify_stage(c, PipelineStage::input);
  StageOutput out(c, PipelineStage::filter);
  out.upstream(PipelineStage::input, up);
  const Table table = load_table(in_dir, "data.csv");
  auto [filtered, trace] = apply_filter_plan(table, c.filter);
  target_of(filtered);
  out.json_file("filter_trace.json", to_json(trace));
  write_table(out, filtered, "filtered.csv");
  out.seal();
}

void stage_profile(const PipelineConfig& c) {
  const json up = verify_stage(c, PipelineStage::filter);
  StageOutput out(c, PipelineStage::profile);
  out.upstream(PipelineStage::filter, up);
  const Table table = load_table(stage_path(c, PipelineStage::filter), "filtered.csv");
  const ProfileReport report = profile_table(table);
  out.json_file("profile.json", to_json(report));
  const Column& target = table.column(table.require_target());
  std::vector<double> y;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (target.present(r)) y.push_back(target.values[r]);
  }
  if (y.empty()) throw ValidationError("target column has no observed values");
  const Histogram h = histogram(y, c.evaluation.hist_bins);
  write_histogram_csv(h, out.file("target_histogram.csv"));
  svg::PlotOptions opt;
  opt.title = "Target distribution";
  opt.x_label = target.meta.name;
  opt.y_label = "count";
  svg::write(out.file("target_histogram.svg"), svg::histogram_plot(h, opt));
  out.seal();
}

void stage_impute(const PipelineConfig& c) {
  const json up = verify_stage(c, PipelineStage::filter);
  StageOutput out(c, PipelineStage::impute);
  out.upstream(PipelineStage::filter, up);
  Table table = load_table(stage_path(c, PipelineStage::filter), "filtered.csv");

  // Rows without a target value cannot be used downstream.
  const Column& target = table.column(table.require_target());
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (target.present(r)) keep.push_back(r);
  }
  const std::size_t dropped = table.n_rows() - keep.size();
  if (keep.empty()) throw ValidationError("target column has no observed values");
  if (dropped > 0) table = table.select_rows(keep);

  const std::size_t before = table.missing_cells();
  json info{{"rows_dropped_missing_target", dropped}, {"missing_cells_before", before}};
  const auto discrete = missing_discrete_columns(table);
  const auto continuous = missing_continuous_columns(table);
  info["discrete_columns"] = discrete.size();
  info["continuous_columns"] = continuous.size();
  if (!discrete.empty() && c.impute.discrete == "knn") {
    table = knn_impute(table, c.impute.knn, discrete);
    info["discrete_method"] = "knn";
  }
  if (!continuous.empty() && c.impute.continuous == "mice") {
    MiceConfig mc = c.impute.mice;
    mc.seed = stage_seed(c, "impute");
    out.seed("mice", mc.seed);
    table = pool_imputations(mice_impute(table, mc, continuous));
    info["continuous_method"] = "mice";
  } else if (!continuous.empty() && c.impute.continuous == "mean") {
    table = mean_impute(table, continuous);
    info["continuous_method"] = "mean";
  }
  info["missing_cells_after"] = table.missing_cells();
  out.json_file("imputation.json", info);
  write_table(out, table, "imputed.csv");
  write_provenance_csv(table, out.file("provenance.csv"));
  out.seal();
}

}  // namespace

std::vector<SelectorRanking> compute_rankings(const SelectSettings& s, const Table& train,
                                              const std::string& target, uint64_t seed) {
  const auto has = [&](std::string_view m) {
    return std::find(s.methods.begin(), s.methods.end(), m) != s.methods.end();
  };
  std::map<std::string, SelectorRanking> out;
  if (has("pearson")) out["pearson"] = correlation_scores(train, target, CorrelationMethod::pearson);
  if (has("spearman")) out["spearman"] = correlation_scores(train, target, CorrelationMethod::spearman);
  if (has("kendall")) out["kendall"] = correlation_scores(train, target, CorrelationMethod::kendall);
  if (has("mutual_information")) out["mutual_information"] = mutual_information_scores(train, target, s.mi_bins);
  if (has("anova_f")) out["anova_f"] = anova_f_scores(train, target, s.mi_bins);
  if (has("relief_f")) {
    out["relief_f"] = relief_f_scores(train, target, s.relief_neighbors, s.relief_samples,
                                      derive_seed(seed, "relief_f"));
  }
  const std::pair<const char*, EmbeddedMethod> embedded[] = {{"lasso", EmbeddedMethod::lasso},
                                                             {"ridge", EmbeddedMethod::ridge},
                                                             {"elastic_net", EmbeddedMethod::elastic_net},
                                                             {"tree_gain", EmbeddedMethod::tree_gain}};
  for (const auto& [id, method] : embedded) {
    if (has(id)) out[id] = embedded_scores(train, target, method, derive_seed(seed, id), s.selector_model);
  }
  if (has("permutation") || has("shap")) {
    const Dataset d = to_dataset(train, target);
    ModelSpec spec;
    spec.id = "selector";
    spec.kind = ModelKind::gbr;
    spec.gbr = s.selector_model;
    spec.gbr.seed = derive_seed(seed, "selector_model");
    const Model model = fit_model(spec, d.x, d.y);
    if (has("permutation")) {
      out["permutation"] = permutation_importance(model, d.x, d.y, ImportanceMetric::r2,
                                                  s.permutation_repeats,
                                                  derive_seed(seed, "permutation"), d.feature_names);
    }
    if (has("shap")) out["shap"] = shap_importance(explain(model, d.x, d.feature_names));
  }
  // Keep the configured method order.
  std::vector<SelectorRanking> rankings;
  for (const auto& m : s.methods) rankings.push_back(std::move(out.at(m)));
  return rankings;
}

namespace {

void stage_select(const PipelineConfig& c) {
  const json up = verify_stage(c, PipelineStage::impute);
  StageOutput out(c, PipelineStage::select);
  out.upstream(PipelineStage::impute, up);
  const Table table = load_table(stage_path(c, PipelineStage::impute), "imputed.csv");
  const std::string target = target_of(table);
  const std::size_t n_features = table.feature_indices().size();
  if (c.select.k > n_features) {
    throw ValidationError("select.k = " + std::to_string(c.select.k) + " exceeds the " +
                          std::to_string(n_features) + " available features");
  }
  const uint64_t split_seed = stage_seed(c, "split");
  const uint64_t seed = stage_seed(c, "select");
  out.seed("split", split_seed);
  out.seed("select", seed);
  const SplitIndices split = split_indices(table.n_rows(), c.evaluation.test_fraction, split_seed);
  out.json_file("split.json", {{"test_fraction", c.evaluation.test_fraction},
                               {"train", split.train},
                               {"test", split.test}});
  const Table train = table.select_rows(split.train);

  const std::vector<SelectorRanking> rankings = compute_rankings(c.select, train, target, seed);
  write_rankings_csv(rankings, out.file("rankings.csv"));
  json per_method = json::object();
  for (const auto& r : rankings) per_method[r.method_id] = r.top(c.select.k);
  const SelectorRanking consensus = aggregate_rankings(rankings);
  out.json_file("consensus.json", {{"k", c.select.k},
                                   {"methods", c.select.methods},
                                   {"features", consensus.top(c.select.k)},
                                   {"method_top_k", std::move(per_method)},
                                   {"ranking", to_json(consensus)}});
  if (c.select.boruta) {
    out.seed("boruta", derive_seed(seed, "boruta"));
    GbrParams model = c.select.selector_model;
    model.subsample_fraction = c.select.boruta_subsample;
    const BorutaVerdict v = boruta(train, target, model, c.select.boruta_alpha,
                                   c.select.boruta_rounds, derive_seed(seed, "boruta"));
    out.json_file("boruta.json", to_json(v));
  }
  out.seal();
}

struct Prepared {
  Table table;
  std::string target;
  SplitIndices split;
  std::vector<std::string> features;
  Dataset train;
  Dataset test;
};

Prepared prepare(const PipelineConfig& c) {
  Prepared p;
  p.table = load_table(stage_path(c, PipelineStage::impute), "imputed.csv");
  p.target = target_of(p.table);
  const fs::path sel = stage_path(c, PipelineStage::select);
  p.split = read_split(sel);
  p.features = read_consensus(sel);
  for (auto r : p.split.train) {
    if (r >= p.table.n_rows()) throw ArtifactError("split.json does not match imputed.csv");
  }
  for (auto r : p.split.test) {
    if (r >= p.table.n_rows()) throw ArtifactError("split.json does not match imputed.csv");
  }
  p.train = to_dataset(p.table.select_rows(p.split.train), p.target, p.features);
  p.test = to_dataset(p.table.select_rows(p.split.test), p.target, p.features);
  return p;
}

std::vector<Model> load_models(const PipelineConfig& c) {
  std::vector<Model> models;
  const fs::path dir = stage_path(c, PipelineStage::train) / "models";
  for (const auto& spec : c.models) models.push_back(load_model(dir / (spec.id + ".json")));
  return models;
}

void stage_train(const PipelineConfig& c) {
  const json up_impute = verify_stage(c, PipelineStage::impute);
  const json up_select = verify_stage(c, PipelineStage::select);
  StageOutput out(c, PipelineStage::train);
  out.upstream(PipelineStage::impute, up_impute);
  out.upstream(PipelineStage::select, up_select);
  const Prepared p = prepare(c);
  const uint64_t seed = stage_seed(c, "train");
  json summary = json::array();
  for (const auto& raw : c.models) {
    const ModelSpec spec = seeded(raw, seed);
    out.seed(spec.id, spec.gbr.seed);
    const Model model = fit_model(spec, p.train.x, p.train.y);
    save_model(model, out.file("models/" + spec.id + ".json"));
    summary.push_back({{"id", spec.id}, {"spec", to_json(spec)}, {"features", p.features},
                       {"n_train", p.train.y.size()}});
  }
  out.json_file("training.json", summary);
  out.seal();
}

void stage_explain(const PipelineConfig& c) {
  const json up_select = verify_stage(c, PipelineStage::select);
  const json up_train = verify_stage(c, PipelineStage::train);
  StageOutput out(c, PipelineStage::explain);
  out.upstream(PipelineStage::select, up_select);
  out.upstream(PipelineStage::train, up_train);
  const Prepared p = prepare(c);
  const std::vector<Model> models = load_models(c);
  const auto& e = c.evaluation;
  json summary = json::object();
  for (const auto& model : models) {
    if (model.n_features() != p.features.size()) {
      throw ArtifactError("model '" + model.id + "' does not match the selected features");
    }
    const ShapMatrix shap = explain(model, p.test.x, p.features, e.draw_stride);
    write_shap_csv(shap, out.file("shap_" + model.id + ".csv"));
    const SelectorRanking imp = shap_importance(shap);
    out.json_file("shap_importance_" + model.id + ".json", to_json(imp));
    {
      std::vector<std::string> labels;
      std::vector<double> values;
      for (const auto& en : imp.entries) {
        labels.push_back(en.feature);
        values.push_back(en.score);
      }
      svg::PlotOptions opt;
      opt.title = "Mean |SHAP| share, " + model.id;
      opt.y_label = "percent";
      svg::write(out.file("shap_" + model.id + ".svg"), svg::bar_plot(labels, values, opt));
    }
    std::vector<PdpCurve> curves;
    GridSpec grid;
    grid.n_points = e.pdp_points;
    const std::size_t n_pdp = std::min(e.pdp_features, p.features.size());
    for (std::size_t i = 0; i < n_pdp; ++i) {
      const std::string& name = imp.entries[i].feature;
      const std::size_t col = feature_columns(p.train, {name})[0];
      curves.push_back(pdp(model, p.train.x, col, name, grid, e.draw_stride));
      const PdpCurve& cv = curves.back();
      std::vector<svg::Series> series{{"partial dependence", cv.grid, cv.mean_prediction, false}};
      if (!cv.lower.empty()) {
        series.push_back({"5th percentile", cv.grid, cv.lower, false});
        series.push_back({"95th percentile", cv.grid, cv.upper, false});
      }
      svg::PlotOptions opt;
      opt.title = "Partial dependence, " + model.id;
      opt.x_label = name;
      opt.y_label = "prediction";
      svg::write(out.file("pdp_" + model.id + "_" + name + ".svg"), svg::line_plot(series, opt));
    }
    write_pdp_csv(curves, out.file("pdp_" + model.id + ".csv"));
    summary[model.id] = {{"base_value", shap.base_value},
                         {"top_features", imp.top(std::min<std::size_t>(10, imp.entries.size()))},
                         {"n_rows", shap.values.rows()}};
  }
  out.json_file("explain.json", summary);
  out.seal();
}

void stage_report(const PipelineConfig& c) {
  json upstream = json::object();
  for (auto s : kStageOrder) {
    if (s == PipelineStage::report) break;
    upstream[std::string(stage_name(s))] = verify_stage(c, s);
  }
  StageOutput out(c, PipelineStage::report);
  for (auto s : kStageOrder) {
    if (s != PipelineStage::report) out.upstream(s, upstream[std::string(stage_name(s))]);
  }
  const Prepared p = prepare(c);
  const std::vector<Model> models = load_models(c);
  const auto& e = c.evaluation;

  json metrics = json::array();
  for (const auto& model : models) {
    const std::vector<double> yhat = predict(model, p.test.x);
    MetricsReport m = compute_metrics(p.test.y, yhat, "test");
    const MetricsReport tr = compute_metrics(p.train.y, predict(model, p.train.x), "train");
    metrics.push_back({{"model", model.id}, {"test", to_json(m)}, {"train", to_json(tr)}});

    const ResidualReport rr = residual_report(p.test.y, yhat, e.hist_bins);
    fs::create_directories(out.dir() / "residuals");
    write_residual_csvs(rr, out.dir() / "residuals", model.id + "_");
    for (const char* suffix : {"residuals.csv", "residual_hist.csv", "residual_kde.csv", "residual_qq.csv"}) {
      out.file("residuals/" + model.id + "_" + suffix);
    }
    out.json_file("residuals/" + model.id + "_summary.json", to_json(rr));

    svg::PlotOptions scatter;
    scatter.title = "Predicted vs observed, " + model.id;
    scatter.x_label = "observed";
    scatter.y_label = "predicted";
    scatter.reference_line = true;
    svg::write(out.file("figures/" + model.id + "_scatter.svg"),
               svg::line_plot({{"test rows", p.test.y, yhat, true}}, scatter));
    svg::PlotOptions hist;
    hist.title = "Residuals, " + model.id;
    hist.x_label = "residual";
    hist.y_label = "density";
    const svg::Series kde{"KDE", rr.kde_grid, rr.kde_density, false};
    svg::write(out.file("figures/" + model.id + "_residual_hist.svg"),
               svg::histogram_plot(rr.histogram, hist, rr.degenerate ? nullptr : &kde));
    if (!rr.degenerate) {
      svg::PlotOptions qq;
      qq.title = "Normal QQ, " + model.id;
      qq.x_label = "theoretical quantile";
      qq.y_label = "standardized residual";
      qq.reference_line = true;
      svg::write(out.file("figures/" + model.id + "_qq.svg"),
                 svg::line_plot({{"residuals", rr.qq_theoretical, rr.qq_sample, true}}, qq));
    }
  }
  out.json_file("metrics.json", metrics);

  // Comparison table: every selector list against every model on the shared split.
  const fs::path sel_dir = stage_path(c, PipelineStage::select);
  const json consensus = read_json(sel_dir / "consensus.json");
  std::vector<std::string> selectors{"consensus"};
  for (const auto& s : e.comparison_selectors) {
    if (s != "consensus") selectors.push_back(s);
  }
  const uint64_t train_seed = stage_seed(c, "train");
  const std::string imputer = c.impute.continuous;
  std::vector<ComparisonConfig> configs;
  for (const auto& sel : selectors) {
    const auto feats = sel == "consensus"
                           ? consensus.at("features").get<std::vector<std::string>>()
                           : consensus.at("method_top_k").at(sel).get<std::vector<std::string>>();
    for (const auto& spec : c.models) {
      ComparisonConfig cc;
      cc.imputer = imputer;
      cc.selector = sel;
      cc.model = seeded(spec, train_seed);
      cc.select = [feats](const Table&) { return feats; };
      configs.push_back(std::move(cc));
    }
  }
  const auto rows = model_comparison(p.table, p.target, configs, e.test_fraction,
                                     stage_seed(c, "split"));
  out.json_file("comparison.json", to_json(rows));
  write_comparison_csv(rows, out.file("comparison.csv"));

  if (e.cv_folds >= 2) {
    json cv = json::array();
    for (const auto& spec : c.models) {
      const CvResult r = kfold_cv(p.table, p.target, make_factory(seeded(spec, train_seed)),
                                  e.cv_folds, stage_seed(c, "cv"), p.features);
      json folds = json::array();
      for (const auto& f : r.folds) folds.push_back(to_json(f));
      cv.push_back({{"model", spec.id}, {"pooled", to_json(r.pooled)}, {"folds", std::move(folds)}});
    }
    out.json_file("cv.json", cv);
  }

  // Bundle index.
  const json trace = read_json(stage_path(c, PipelineStage::filter) / "filter_trace.json");
  const json profile = read_json(stage_path(c, PipelineStage::profile) / "profile.json");
  const json explain_summary = read_json(stage_path(c, PipelineStage::explain) / "explain.json");
  json artifacts = json::object();
  for (const auto& [stage, manifest] : upstream.items()) {
    for (const auto& [name, hash] : manifest.at("files").items()) {
      artifacts[stage_dir_name(parse_pipeline_stage(stage)) + "/" + name] = hash;
    }
  }
  out.json_file("report.json", {{"config_hash", config_hash(c)},
                                {"target", p.target},
                                {"filter_trace", trace},
                                {"profile",
                                 {{"n_features", profile.at("n_features")},
                                  {"n_continuous", profile.at("n_continuous")},
                                  {"n_discrete", profile.at("n_discrete")},
                                  {"dataset_missing_fraction", profile.at("dataset_missing_fraction")}}},
                                {"selected_features", p.features},
                                {"metrics", metrics},
                                {"comparison", to_json(rows)},
                                {"shap", explain_summary},
                                {"artifacts", std::move(artifacts)}});
  out.seal();
}

}  // namespace

json verify_stage(const PipelineConfig& config, PipelineStage stage) {
  const fs::path dir = stage_path(config, stage);
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) {
    throw ArtifactError("missing upstream artifact: stage '" + std::string(stage_name(stage)) +
                        "' has not been run in " + config.output_dir.string());
  }
  const json m = read_json(mpath);
  const std::string expected = config_hash(config);
  if (m.value("config_hash", std::string{}) != expected) {
    throw ArtifactError("stage '" + std::string(stage_name(stage)) + "' was produced by config " +
                        m.value("config_hash", std::string("?")) + ", expected " + expected);
  }
  for (const auto& [name, hash] : m.at("files").items()) {
    if (file_hash(dir / name) != hash.get<std::string>()) {
      throw ArtifactError("artifact '" + (dir / name).string() + "' changed after it was written");
    }
  }
  return m;
}

void run_stage(const PipelineConfig& config, PipelineStage stage) {
  const std::string name(stage_name(stage));
  auto fail = [&](std::string_view type, const std::string& message) {
    fs::create_directories(config.output_dir);
    write_json(config.output_dir / "error.json",
               {{"stage", name}, {"error_type", type}, {"message", message}});
    throw StageError(name, message);
  };
  try {
    switch (stage) {
      case PipelineStage::input: stage_input(config); break;
      case PipelineStage::filter: stage_filter(config); break;
      case PipelineStage::profile: stage_profile(config); break;
      case PipelineStage::impute: stage_impute(config); break;
      case PipelineStage::select: stage_select(config); break;
      case PipelineStage::train: stage_train(config); break;
      case PipelineStage::explain: stage_explain(config); break;
      case PipelineStage::report: stage_report(config); break;
    }
  } catch (const ArtifactError& e) {
    fail("artifact", e.what());
  } catch (const ValidationError& e) {
    fail("validation", e.what());
  } catch (const json::exception& e) {
    fail("artifact", e.what());
  } catch (const std::exception& e) {
    fail("runtime", e.what());
  }
  std::error_code ec;
  fs::remove(config.output_dir / "error.json", ec);
}

void run_pipeline(const PipelineConfig& config) {
  config.validate();
  for (auto s : kStageOrder) run_stage(config, s);
}

}  // namespace tabreg

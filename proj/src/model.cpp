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

#include "tabreg/model.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace tabreg {

namespace {

constexpr const char* kFormat = "tabreg-model";
constexpr int kVersion = 1;

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

nlohmann::json tree_to_json(const DecisionTree& t) {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value, cover, gain;
  bool any_gain = false;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    cover.push_back(n.cover);
    gain.push_back(n.gain);
    any_gain = any_gain || n.gain != 0.0;
  }
  nlohmann::json j{{"feature", feature}, {"threshold", threshold}, {"left", left},
                   {"right", right},     {"value", value},         {"cover", cover}};
  if (any_gain) j["gain"] = gain;
  return j;
}

DecisionTree tree_from_json(const nlohmann::json& j, std::size_t n_features) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const auto cover = j.at("cover").get<std::vector<double>>();
  const auto gain = j.contains("gain") ? j.at("gain").get<std::vector<double>>()
                                       : std::vector<double>(feature.size(), 0.0);
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
      cover.size() != n || gain.size() != n) {
    throw ArtifactError("tree node arrays have different lengths");
  }
  DecisionTree t;
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.nodes[i] = TreeNode{feature[i], threshold[i], left[i], right[i], value[i], cover[i], gain[i]};
  }
  try {
    t.validate(n_features);
  } catch (const ValidationError& e) {
    throw ArtifactError(e.what());
  }
  return t;
}

nlohmann::json ensemble_to_json(const TreeEnsemble& e) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : e.trees) trees.push_back(tree_to_json(t));
  nlohmann::json j{{"base_prediction", e.base_prediction},
                   {"learning_rate", e.learning_rate},
                   {"n_features", e.n_features},
                   {"trees", std::move(trees)}};
  if (!e.training_loss.empty()) j["training_loss"] = e.training_loss;
  return j;
}

TreeEnsemble ensemble_from_json(const nlohmann::json& j) {
  TreeEnsemble e;
  e.base_prediction = j.at("base_prediction").get<double>();
  e.learning_rate = j.at("learning_rate").get<double>();
  e.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& t : j.at("trees")) e.trees.push_back(tree_from_json(t, e.n_features));
  e.training_loss = get_or(j, "training_loss", std::vector<double>{});
  return e;
}

nlohmann::json gbr_params_json(const GbrParams& p) {
  return {{"n_iterations", p.n_iterations}, {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate}, {"min_leaf", p.min_leaf},
          {"subsample_fraction", p.subsample_fraction}, {"seed", p.seed}};
}

GbrParams gbr_params_from(const nlohmann::json& j) {
  GbrParams p;
  p.n_iterations = get_or(j, "n_iterations", p.n_iterations);
  p.max_depth = get_or(j, "max_depth", p.max_depth);
  p.learning_rate = get_or(j, "learning_rate", p.learning_rate);
  p.min_leaf = get_or(j, "min_leaf", p.min_leaf);
  p.subsample_fraction = get_or(j, "subsample_fraction", p.subsample_fraction);
  p.seed = get_or(j, "seed", p.seed);
  return p;
}

nlohmann::json bart_config_json(const BartConfig& c) {
  return {{"n_trees", c.n_trees},   {"n_iterations", c.n_iterations},
          {"burn_in", c.burn_in},   {"thin", c.thin},
          {"alpha", c.alpha},       {"beta", c.beta},
          {"k", c.k},               {"nu", c.nu},
          {"q", c.q},               {"max_cutpoints", c.max_cutpoints},
          {"min_leaf", c.min_leaf}, {"p_grow", c.p_grow},
          {"p_prune", c.p_prune},   {"seed", c.seed}};
}

BartConfig bart_config_from(const nlohmann::json& j) {
  BartConfig c;
  c.n_trees = get_or(j, "n_trees", c.n_trees);
  c.n_iterations = get_or(j, "n_iterations", c.n_iterations);
  c.burn_in = get_or(j, "burn_in", c.burn_in);
  c.thin = get_or(j, "thin", c.thin);
  c.alpha = get_or(j, "alpha", c.alpha);
  c.beta = get_or(j, "beta", c.beta);
  c.k = get_or(j, "k", c.k);
  c.nu = get_or(j, "nu", c.nu);
  c.q = get_or(j, "q", c.q);
  c.max_cutpoints = get_or(j, "max_cutpoints", c.max_cutpoints);
  c.min_leaf = get_or(j, "min_leaf", c.min_leaf);
  c.p_grow = get_or(j, "p_grow", c.p_grow);
  c.p_prune = get_or(j, "p_prune", c.p_prune);
  c.seed = get_or(j, "seed", c.seed);
  return c;
}

const std::set<std::string>& allowed_keys(ModelKind k) {
  static const std::set<std::string> linear{"l1", "l2", "cv_l1_ratio", "cv_folds", "seed"};
  static const std::set<std::string> gbr{"n_iterations", "max_depth", "learning_rate",
                                         "min_leaf", "subsample_fraction", "seed"};
  static const std::set<std::string> bart{"n_trees", "n_iterations", "burn_in", "thin",
                                          "alpha", "beta", "k", "nu", "q", "max_cutpoints",
                                          "min_leaf", "p_grow", "p_prune", "seed"};
  switch (k) {
    case ModelKind::linear: return linear;
    case ModelKind::gbr: return gbr;
    case ModelKind::bart: return bart;
  }
  return linear;
}

}  // namespace

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::linear: return "linear";
    case ModelKind::gbr: return "gbr";
    case ModelKind::bart: return "bart";
  }
  return "linear";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "linear") return ModelKind::linear;
  if (s == "gbr") return ModelKind::gbr;
  if (s == "bart") return ModelKind::bart;
  throw ValidationError("unknown model kind '" + std::string(s) + "'");
}

ModelSpec tuned_gbr_spec(uint64_t seed) {
  ModelSpec s;
  s.id = "gbr";
  s.kind = ModelKind::gbr;
  s.gbr.n_iterations = 1748;
  s.gbr.max_depth = 4;
  s.gbr.learning_rate = 0.0075;
  s.gbr.seed = seed;
  return s;
}

ModelSpec default_bart_spec(uint64_t seed) {
  ModelSpec s;
  s.id = "bart";
  s.kind = ModelKind::bart;
  s.bart.seed = seed;
  return s;
}

ModelSpec ridge_spec(uint64_t seed) {
  ModelSpec s;
  s.id = "linear";
  s.kind = ModelKind::linear;
  s.linear.cv_l1_ratio = 0.0;
  s.linear.seed = seed;
  return s;
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json params;
  switch (spec.kind) {
    case ModelKind::linear:
      params = {{"l1", spec.linear.l1}, {"l2", spec.linear.l2},
                {"cv_folds", spec.linear.cv_folds}, {"seed", spec.linear.seed}};
      if (spec.linear.cv_l1_ratio) params["cv_l1_ratio"] = *spec.linear.cv_l1_ratio;
      break;
    case ModelKind::gbr: params = gbr_params_json(spec.gbr); break;
    case ModelKind::bart: params = bart_config_json(spec.bart); break;
  }
  return {{"id", spec.id}, {"kind", to_string(spec.kind)}, {"params", std::move(params)}};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  try {
    ModelSpec s;
    s.kind = parse_model_kind(j.at("kind").get<std::string>());
    s.id = get_or(j, "id", std::string(to_string(s.kind)));
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    const auto& allowed = allowed_keys(s.kind);
    for (const auto& [key, _] : params.items()) {
      if (!allowed.count(key)) {
        throw ValidationError("model '" + s.id + "': unknown parameter '" + key + "'");
      }
    }
    switch (s.kind) {
      case ModelKind::linear:
        s.linear.l1 = get_or(params, "l1", 0.0);
        s.linear.l2 = get_or(params, "l2", 0.0);
        if (params.contains("cv_l1_ratio")) s.linear.cv_l1_ratio = params.at("cv_l1_ratio").get<double>();
        s.linear.cv_folds = get_or(params, "cv_folds", s.linear.cv_folds);
        s.linear.seed = get_or(params, "seed", s.linear.seed);
        break;
      case ModelKind::gbr:
        s.gbr = gbr_params_from(params);
        s.gbr.validate();
        break;
      case ModelKind::bart:
        s.bart = bart_config_from(params);
        s.bart.validate();
        break;
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model spec: ") + e.what());
  }
}

ModelKind Model::kind() const {
  switch (fit.index()) {
    case 0: return ModelKind::linear;
    case 1: return ModelKind::gbr;
    default: return ModelKind::bart;
  }
}

std::size_t Model::n_features() const {
  if (const auto* m = std::get_if<LinearModel>(&fit)) return m->coefficients.size();
  if (const auto* m = std::get_if<TreeEnsemble>(&fit)) return m->n_features;
  return std::get<BartPosterior>(fit).n_features;
}

Model fit_model(const ModelSpec& spec, const Matrix& x, std::span<const double> y) {
  Model m;
  m.id = spec.id;
  switch (spec.kind) {
    case ModelKind::linear: {
      LinearOptions opt;
      opt.l1 = spec.linear.l1;
      opt.l2 = spec.linear.l2;
      if (spec.linear.cv_l1_ratio) {
        const double ratio = *spec.linear.cv_l1_ratio;
        const std::size_t folds = std::min(spec.linear.cv_folds, x.rows());
        const PenaltySearch search = cross_validate_penalty(x, y, ratio, folds, spec.linear.seed);
        opt.l1 = search.best_penalty * ratio;
        opt.l2 = search.best_penalty * (1.0 - ratio);
      }
      m.fit = fit_linear(x, y, opt);
      break;
    }
    case ModelKind::gbr: m.fit = fit_gbr(x, y, spec.gbr); break;
    case ModelKind::bart: m.fit = fit_bart(x, y, spec.bart); break;
  }
  return m;
}

std::vector<double> predict(const Model& model, const Matrix& x) {
  if (const auto* m = std::get_if<LinearModel>(&model.fit)) return predict(*m, x);
  if (const auto* m = std::get_if<TreeEnsemble>(&model.fit)) return m->predict(x);
  return predict_bart(std::get<BartPosterior>(model.fit), x).mean;
}

std::vector<double> feature_importance(const Model& model) {
  if (const auto* m = std::get_if<LinearModel>(&model.fit)) {
    std::vector<double> out;
    for (double c : m->fitted_coefficients) out.push_back(std::fabs(c));
    return out;
  }
  if (const auto* m = std::get_if<TreeEnsemble>(&model.fit)) return m->gain_importance();
  return inclusion_proportions(std::get<BartPosterior>(model.fit));
}

ModelFactory make_factory(ModelSpec spec) {
  return [spec = std::move(spec)](const Matrix& x, std::span<const double> y) {
    return fit_model(spec, x, y);
  };
}

nlohmann::json to_json(const Model& model) {
  nlohmann::json j{{"format", kFormat},
                   {"version", kVersion},
                   {"id", model.id},
                   {"kind", to_string(model.kind())}};
  if (const auto* m = std::get_if<LinearModel>(&model.fit)) {
    j["intercept"] = m->intercept;
    j["coefficients"] = m->coefficients;
    j["feature_means"] = m->feature_means;
    j["feature_scales"] = m->feature_scales;
    j["fitted_coefficients"] = m->fitted_coefficients;
    j["sweeps"] = m->sweeps;
    j["converged"] = m->converged;
  } else if (const auto* m = std::get_if<TreeEnsemble>(&model.fit)) {
    j["ensemble"] = ensemble_to_json(*m);
  } else {
    const auto& p = std::get<BartPosterior>(model.fit);
    nlohmann::json draws = nlohmann::json::array();
    for (const auto& d : p.draws) {
      nlohmann::json trees = nlohmann::json::array();
      for (const auto& t : d.trees) trees.push_back(tree_to_json(t));
      draws.push_back(std::move(trees));
    }
    j["config"] = bart_config_json(p.config);
    j["n_features"] = p.n_features;
    j["offset"] = p.draws.empty() ? 0.0 : p.draws.front().base_prediction;
    j["acceptance_rate"] = p.acceptance_rate;
    j["sigma_draws"] = p.sigma_draws;
    j["draws"] = std::move(draws);
  }
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw ArtifactError("not a tabreg model");
    if (j.at("version").get<int>() != kVersion) {
      throw ArtifactError("unsupported model version " + j.at("version").dump());
    }
    Model m;
    m.id = j.at("id").get<std::string>();
    switch (parse_model_kind(j.at("kind").get<std::string>())) {
      case ModelKind::linear: {
        LinearModel lm;
        lm.intercept = j.at("intercept").get<double>();
        lm.coefficients = j.at("coefficients").get<std::vector<double>>();
        lm.feature_means = j.at("feature_means").get<std::vector<double>>();
        lm.feature_scales = j.at("feature_scales").get<std::vector<double>>();
        lm.fitted_coefficients = j.at("fitted_coefficients").get<std::vector<double>>();
        lm.sweeps = j.at("sweeps").get<std::size_t>();
        lm.converged = j.at("converged").get<bool>();
        m.fit = std::move(lm);
        break;
      }
      case ModelKind::gbr: m.fit = ensemble_from_json(j.at("ensemble")); break;
      case ModelKind::bart: {
        BartPosterior p;
        p.config = bart_config_from(j.at("config"));
        p.n_features = j.at("n_features").get<std::size_t>();
        p.acceptance_rate = j.at("acceptance_rate").get<double>();
        p.sigma_draws = j.at("sigma_draws").get<std::vector<double>>();
        const double offset = j.at("offset").get<double>();
        for (const auto& jd : j.at("draws")) {
          TreeEnsemble e;
          e.base_prediction = offset;
          e.learning_rate = 1.0;
          e.n_features = p.n_features;
          for (const auto& t : jd) e.trees.push_back(tree_from_json(t, p.n_features));
          p.draws.push_back(std::move(e));
        }
        if (p.draws.size() != p.sigma_draws.size()) {
          throw ArtifactError("BART draw and sigma counts differ");
        }
        m.fit = std::move(p);
        break;
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed model JSON: ") + e.what());
  } catch (const ValidationError& e) {
    throw ArtifactError(e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << to_json(model).dump() << '\n';
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing model artifact " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError("cannot parse " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace tabreg

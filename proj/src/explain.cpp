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

#include "tabreg/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace tabreg {

namespace {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double pweight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature) {
  path[depth] = PathElement{feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].pweight += one_fraction * path[i].pweight * (i + 1) / (depth + 1);
    path[i].pweight = zero_fraction * path[i].pweight * (depth - i) / (depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one = path[depth].pweight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].pweight;
      path[i].pweight = next_one * (depth + 1) / ((i + 1) * one_fraction);
      next_one = tmp - path[i].pweight * zero_fraction * (depth - i) / (depth + 1);
    } else {
      path[i].pweight = path[i].pweight * (depth + 1) / (zero_fraction * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one = path[depth].pweight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = next_one * (depth + 1) / ((i + 1) * one_fraction);
      total += tmp;
      next_one = path[i].pweight - tmp * zero_fraction * (depth - i) / (depth + 1);
    } else {
      total += path[i].pweight / zero_fraction / (static_cast<double>(depth - i) / (depth + 1));
    }
  }
  return total;
}

struct ShapWalk {
  const DecisionTree& tree;
  std::span<const double> x;
  std::span<double> phi;
  double scale;

  void recurse(int node, PathElement* parent_path, int depth, double zero_fraction,
               double one_fraction, int feature) {
    PathElement* path = parent_path + depth;
    std::copy(parent_path, parent_path + depth, path);
    extend_path(path, depth, zero_fraction, one_fraction, feature);

    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        const PathElement& el = path[i];
        phi[static_cast<std::size_t>(el.feature)] +=
            scale * w * (el.one_fraction - el.zero_fraction) * n.value;
      }
      return;
    }
    const bool go_left = x[static_cast<std::size_t>(n.feature)] <= n.threshold;
    const int hot = go_left ? n.left : n.right;
    const int cold = go_left ? n.right : n.left;
    const double cover = n.cover;
    const double hot_cover = tree.nodes[static_cast<std::size_t>(hot)].cover;
    const double cold_cover = tree.nodes[static_cast<std::size_t>(cold)].cover;
    if (!(cover > 0.0)) throw ValidationError("tree_shap: node without cover counts");

    double incoming_zero = 1.0, incoming_one = 1.0;
    int index = 0;
    for (; index <= depth; ++index) {
      if (path[index].feature == n.feature) break;
    }
    if (index != depth + 1) {
      incoming_zero = path[index].zero_fraction;
      incoming_one = path[index].one_fraction;
      unwind_path(path, depth, index);
      --depth;
    }
    recurse(hot, path, depth + 1, hot_cover / cover * incoming_zero, incoming_one, n.feature);
    recurse(cold, path, depth + 1, cold_cover / cover * incoming_zero, 0.0, n.feature);
  }
};

std::vector<std::string> default_names(std::vector<std::string> names, std::size_t p) {
  if (names.empty()) {
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  }
  if (names.size() != p) throw ValidationError("feature name count does not match model");
  return names;
}

void shap_ensemble_rows(const TreeEnsemble& ens, const Matrix& x, Matrix& values, double weight) {
  std::size_t max_depth = 0;
  for (const auto& t : ens.trees) max_depth = std::max(max_depth, t.depth());
  const std::size_t slots = (max_depth + 2) * (max_depth + 3) / 2;
  parallel_for(x.rows(), [&](std::size_t r) {
    std::vector<PathElement> buffer(slots);
    std::vector<double> phi(ens.n_features, 0.0);
    for (const auto& t : ens.trees) {
      if (t.nodes.size() <= 1) continue;
      ShapWalk walk{t, x.row(r), phi, ens.learning_rate};
      walk.recurse(0, buffer.data(), 0, 1.0, 1.0, -1);
    }
    auto out = values.row(r);
    for (std::size_t j = 0; j < phi.size(); ++j) out[j] += weight * phi[j];
  });
}

double ensemble_base(const TreeEnsemble& ens) {
  double s = 0.0;
  for (const auto& t : ens.trees) s += t.expected_value();
  return ens.base_prediction + ens.learning_rate * s;
}

}  // namespace

void tree_shap_add(const DecisionTree& tree, std::span<const double> x, std::span<double> phi,
                   double scale) {
  if (tree.nodes.size() <= 1) return;
  const std::size_t d = tree.depth();
  std::vector<PathElement> buffer((d + 2) * (d + 3) / 2);
  ShapWalk walk{tree, x, phi, scale};
  walk.recurse(0, buffer.data(), 0, 1.0, 1.0, -1);
}

ShapMatrix tree_shap(const TreeEnsemble& ensemble, const Matrix& x,
                     std::vector<std::string> feature_names) {
  if (x.cols() != ensemble.n_features) throw ValidationError("tree_shap: feature count mismatch");
  for (const auto& t : ensemble.trees) {
    if (t.nodes.size() > 1 && !(t.nodes.front().cover > 0.0)) {
      throw ValidationError("tree_shap: ensemble has no cover counts");
    }
  }
  ShapMatrix s;
  s.feature_names = default_names(std::move(feature_names), x.cols());
  s.base_value = ensemble_base(ensemble);
  s.values = Matrix(x.rows(), x.cols());
  shap_ensemble_rows(ensemble, x, s.values, 1.0);
  return s;
}

ShapMatrix bart_shap(const BartPosterior& posterior, const Matrix& x,
                     std::vector<std::string> feature_names, std::size_t draw_stride) {
  if (posterior.draws.empty()) throw ValidationError("bart_shap: empty posterior");
  if (draw_stride < 1) throw ValidationError("bart_shap: draw_stride must be >= 1");
  if (x.cols() != posterior.n_features) throw ValidationError("bart_shap: feature count mismatch");
  ShapMatrix s;
  s.feature_names = default_names(std::move(feature_names), x.cols());
  s.values = Matrix(x.rows(), x.cols());
  std::vector<std::size_t> used;
  for (std::size_t d = 0; d < posterior.draws.size(); d += draw_stride) used.push_back(d);
  const double w = 1.0 / static_cast<double>(used.size());
  for (std::size_t d : used) {
    s.base_value += w * ensemble_base(posterior.draws[d]);
    shap_ensemble_rows(posterior.draws[d], x, s.values, w);
  }
  return s;
}

ShapMatrix linear_shap(const LinearModel& model, const Matrix& x,
                       std::vector<std::string> feature_names) {
  if (x.cols() != model.coefficients.size()) {
    throw ValidationError("linear_shap: feature count mismatch");
  }
  ShapMatrix s;
  s.feature_names = default_names(std::move(feature_names), x.cols());
  s.base_value = model.intercept;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    s.base_value += model.coefficients[j] * model.feature_means[j];
  }
  s.values = Matrix(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      s.values(r, j) = model.coefficients[j] * (x(r, j) - model.feature_means[j]);
    }
  }
  return s;
}

ShapMatrix explain(const Model& model, const Matrix& x, std::vector<std::string> feature_names,
                   std::size_t draw_stride) {
  ShapMatrix s;
  if (const auto* m = std::get_if<LinearModel>(&model.fit)) {
    s = linear_shap(*m, x, std::move(feature_names));
  } else if (const auto* m = std::get_if<TreeEnsemble>(&model.fit)) {
    s = tree_shap(*m, x, std::move(feature_names));
  } else {
    s = bart_shap(std::get<BartPosterior>(model.fit), x, std::move(feature_names), draw_stride);
  }
  s.model_id = model.id;
  return s;
}

SelectorRanking shap_importance(const ShapMatrix& shap) {
  if (shap.values.rows() == 0) throw ValidationError("shap_importance: empty matrix");
  std::vector<double> score(shap.values.cols(), 0.0);
  for (std::size_t r = 0; r < shap.values.rows(); ++r) {
    for (std::size_t j = 0; j < score.size(); ++j) score[j] += std::fabs(shap.values(r, j));
  }
  const double total = std::accumulate(score.begin(), score.end(), 0.0);
  for (double& v : score) v = total > 0.0 ? 100.0 * v / total : 0.0;
  return make_ranking("shap", shap.feature_names, std::move(score));
}

namespace {

double metric_value(ImportanceMetric metric, std::span<const double> y,
                    std::span<const double> pred) {
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += (y[i] - pred[i]) * (y[i] - pred[i]);
  if (metric == ImportanceMetric::rmse) return std::sqrt(ss / static_cast<double>(y.size()));
  const double m = mean(y);
  double tot = 0.0;
  for (double v : y) tot += (v - m) * (v - m);
  return tot > 0.0 ? 1.0 - ss / tot : 0.0;
}

}  // namespace

SelectorRanking permutation_importance(const Model& model, const Matrix& x,
                                       std::span<const double> y, ImportanceMetric metric,
                                       std::size_t n_repeats, uint64_t seed,
                                       const std::vector<std::string>& feature_names) {
  if (n_repeats < 1) throw ValidationError("permutation_importance: n_repeats must be >= 1");
  if (x.rows() != y.size()) throw ValidationError("permutation_importance: X/y row mismatch");
  if (feature_names.size() != x.cols()) {
    throw ValidationError("permutation_importance: feature name count mismatch");
  }
  const double base = metric_value(metric, y, predict(model, x));
  std::vector<double> score(x.cols(), 0.0);
  parallel_for(x.cols(), [&](std::size_t j) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(j)));
    Matrix shuffled = x;
    const std::vector<double> original = x.column(j);
    double total = 0.0;
    for (std::size_t rep = 0; rep < n_repeats; ++rep) {
      const auto perm = permutation(x.rows(), rng);
      for (std::size_t i = 0; i < x.rows(); ++i) shuffled(i, j) = original[perm[i]];
      const double m = metric_value(metric, y, predict(model, shuffled));
      total += metric == ImportanceMetric::rmse ? m - base : base - m;
    }
    score[j] = total / static_cast<double>(n_repeats);
  });
  return make_ranking("permutation", feature_names, std::move(score));
}

std::vector<double> pdp_grid(std::span<const double> column, const GridSpec& spec) {
  if (!spec.explicit_grid.empty()) {
    for (std::size_t i = 1; i < spec.explicit_grid.size(); ++i) {
      if (!(spec.explicit_grid[i] > spec.explicit_grid[i - 1])) {
        throw ValidationError("pdp: explicit grid must be strictly increasing");
      }
    }
    return spec.explicit_grid;
  }
  if (column.empty()) throw ValidationError("pdp: empty column");
  if (spec.n_points < 1) throw ValidationError("pdp: n_points must be >= 1");
  std::vector<double> v(column.begin(), column.end());
  const double lo = quantile(v, spec.lower_quantile);
  const double hi = quantile(v, spec.upper_quantile);
  if (!(hi > lo) || spec.n_points == 1) return {lo};
  std::vector<double> grid(spec.n_points);
  for (std::size_t g = 0; g < spec.n_points; ++g) {
    grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(spec.n_points - 1);
  }
  grid.back() = hi;
  return grid;
}

PdpCurve pdp(const Model& model, const Matrix& x, std::size_t feature, std::string name,
             const GridSpec& spec, std::size_t draw_stride) {
  if (x.rows() == 0) throw ValidationError("pdp: empty X");
  if (feature >= x.cols()) throw ValidationError("pdp: feature index out of range");
  if (draw_stride < 1) throw ValidationError("pdp: draw_stride must be >= 1");
  PdpCurve c;
  c.feature = std::move(name);
  c.grid = pdp_grid(x.column(feature), spec);
  c.mean_prediction.resize(c.grid.size());
  const auto* bart = std::get_if<BartPosterior>(&model.fit);
  if (bart != nullptr) {
    c.lower.resize(c.grid.size());
    c.upper.resize(c.grid.size());
  }
  parallel_for(c.grid.size(), [&](std::size_t g) {
    Matrix forced = x;
    for (std::size_t i = 0; i < x.rows(); ++i) forced(i, feature) = c.grid[g];
    if (bart == nullptr) {
      c.mean_prediction[g] = mean(predict(model, forced));
      return;
    }
    std::vector<double> curve;
    for (std::size_t d = 0; d < bart->draws.size(); d += draw_stride) {
      const TreeEnsemble& ens = bart->draws[d];
      double s = 0.0;
      for (std::size_t i = 0; i < forced.rows(); ++i) s += ens.predict_row(forced.row(i));
      curve.push_back(s / static_cast<double>(forced.rows()));
    }
    c.mean_prediction[g] = mean(curve);
    c.lower[g] = quantile(curve, 0.05);
    c.upper[g] = quantile(curve, 0.95);
  });
  return c;
}

void write_shap_csv(const ShapMatrix& shap, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << "row,base_value";
  for (const auto& n : shap.feature_names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < shap.values.rows(); ++r) {
    out << r << ',' << format_double(shap.base_value);
    for (std::size_t j = 0; j < shap.values.cols(); ++j) out << ',' << format_double(shap.values(r, j));
    out << '\n';
  }
}

void write_pdp_csv(const std::vector<PdpCurve>& curves, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << "feature,grid,mean_prediction,lower,upper\n";
  for (const auto& c : curves) {
    for (std::size_t g = 0; g < c.grid.size(); ++g) {
      out << c.feature << ',' << format_double(c.grid[g]) << ','
          << format_double(c.mean_prediction[g]) << ','
          << (c.lower.empty() ? "" : format_double(c.lower[g])) << ','
          << (c.upper.empty() ? "" : format_double(c.upper[g])) << '\n';
    }
  }
}

}  // namespace tabreg

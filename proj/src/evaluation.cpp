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

#include "tabreg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace tabreg {

MetricsReport compute_metrics(std::span<const double> y, std::span<const double> yhat,
                              std::string split_id) {
  if (y.size() != yhat.size()) throw ValidationError("compute_metrics: length mismatch");
  if (y.empty()) throw ValidationError("compute_metrics: empty input");
  MetricsReport m;
  m.n = y.size();
  m.split_id = std::move(split_id);
  const double ybar = mean(y);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  m.mse = ss_res / static_cast<double>(m.n);
  m.rmse = std::sqrt(m.mse);
  m.r2_defined = ss_tot > 0.0;
  m.r2 = m.r2_defined ? 1.0 - ss_res / ss_tot : std::numeric_limits<double>::quiet_NaN();
  return m;
}

CvResult kfold_cv(const Table& table, std::string_view target, const ModelFactory& factory,
                  std::size_t k_folds, uint64_t seed, std::span<const std::string> features) {
  const Dataset ds = features.empty() ? to_dataset(table, target)
                                      : to_dataset(table, target, features);
  const std::size_t n = ds.x.rows();
  if (k_folds < 2 || k_folds > n) throw ValidationError("kfold_cv: k_folds must be in [2, n_rows]");
  if (n - (n + k_folds - 1) / k_folds < 2) {
    throw ValidationError("kfold_cv: a training partition would have fewer than two rows");
  }
  CvResult out;
  out.fold_of = fold_assignment(n, k_folds, seed);
  out.oof_predictions.assign(n, 0.0);
  out.folds.resize(k_folds);
  for (std::size_t f = 0; f < k_folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (out.fold_of[i] == f ? test : train).push_back(i);
    std::vector<double> ytr, yte;
    for (auto i : train) ytr.push_back(ds.y[i]);
    for (auto i : test) yte.push_back(ds.y[i]);
    const Model model = factory(ds.x.select_rows(train), ytr);
    const auto pred = predict(model, ds.x.select_rows(test));
    for (std::size_t t = 0; t < test.size(); ++t) out.oof_predictions[test[t]] = pred[t];
    out.folds[f] = compute_metrics(yte, pred, "fold" + std::to_string(f));
  }
  out.pooled = compute_metrics(ds.y, out.oof_predictions, "pooled");
  return out;
}

double silverman_bandwidth(std::span<const double> values) {
  const double sd = std::sqrt(sample_variance(values));
  std::vector<double> v(values.begin(), values.end());
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double n = static_cast<double>(values.size());
  return 0.9 * spread * std::pow(n, -0.2);
}

ResidualReport residual_report(std::span<const double> y, std::span<const double> yhat,
                               std::size_t n_bins, std::optional<double> bandwidth) {
  if (y.size() != yhat.size()) throw ValidationError("residual_report: length mismatch");
  if (y.size() < 3) throw ValidationError("residual_report: need at least three rows");
  ResidualReport r;
  const std::size_t n = y.size();
  r.predicted.assign(yhat.begin(), yhat.end());
  r.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.residuals[i] = y[i] - yhat[i];
  r.histogram = histogram(r.residuals, n_bins);

  const double mu = mean(r.residuals);
  const double sd = std::sqrt(sample_variance(r.residuals));
  if (!(sd > 0.0)) {
    r.degenerate = true;
    return r;
  }
  const SummaryStats stats = summarize(r.residuals);
  r.skewness = stats.skewness.value_or(0.0);

  // Residual-on-prediction least-squares slope.
  const double pm = mean(r.predicted);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (r.predicted[i] - pm) * (r.residuals[i] - mu);
    sxx += (r.predicted[i] - pm) * (r.predicted[i] - pm);
  }
  r.residual_vs_predicted_slope = sxx > 0.0 ? sxy / sxx : 0.0;

  r.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(r.residuals);
  if (!(r.bandwidth > 0.0)) throw ValidationError("residual_report: bandwidth must be positive");
  const double lo = stats.min - 3.0 * r.bandwidth;
  const double hi = stats.max + 3.0 * r.bandwidth;
  r.kde_grid.resize(kKdeGridPoints);
  r.kde_density.resize(kKdeGridPoints);
  const double norm = 1.0 / (static_cast<double>(n) * r.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  parallel_for(kKdeGridPoints, [&](std::size_t g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(kKdeGridPoints - 1);
    double s = 0.0;
    for (double e : r.residuals) {
      const double z = (x - e) / r.bandwidth;
      s += std::exp(-0.5 * z * z);
    }
    r.kde_grid[g] = x;
    r.kde_density[g] = s * norm;
  });

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (r.residuals[i] - mu) / sd;
  std::sort(z.begin(), z.end());
  const boost::math::normal_distribution<double> unit;
  r.qq_theoretical.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.qq_theoretical[i] =
        boost::math::quantile(unit, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  r.qq_sample = std::move(z);
  return r;
}

std::vector<ComparisonRow> model_comparison(const Table& table, std::string_view target,
                                            const std::vector<ComparisonConfig>& configs,
                                            double test_fraction, uint64_t split_seed) {
  if (configs.empty()) throw ValidationError("model_comparison: no configs");
  const SplitIndices split = split_indices(table.n_rows(), test_fraction, split_seed);
  std::vector<ComparisonRow> rows(configs.size());
  parallel_for(configs.size(), [&](std::size_t c) {
    const ComparisonConfig& cfg = configs[c];
    ComparisonRow& row = rows[c];
    row.imputer = cfg.imputer;
    row.selector = cfg.selector;
    row.model_id = cfg.model.id;
    row.provenance = {{"model", to_json(cfg.model)},
                      {"split_seed", split_seed},
                      {"test_fraction", test_fraction}};
    try {
      const Table full = cfg.impute ? cfg.impute(table) : table;
      const Table train = full.select_rows(split.train);
      const Table test = full.select_rows(split.test);
      if (cfg.select) {
        row.features = cfg.select(train);
      } else {
        const std::size_t t = full.index_of(target);
        for (std::size_t i : full.feature_indices()) {
          if (i != t) row.features.push_back(full.column(i).meta.name);
        }
      }
      const Dataset dtr = to_dataset(train, target, row.features);
      const Dataset dte = to_dataset(test, target, row.features);
      const Model model = fit_model(cfg.model, dtr.x, dtr.y);
      row.test = compute_metrics(dte.y, predict(model, dte.x), "test");
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const ComparisonRow& ra = rows[a];
    const ComparisonRow& rb = rows[b];
    if (ra.failed != rb.failed) return !ra.failed;
    if (ra.failed) return false;
    const double xa = ra.test.r2_defined ? ra.test.r2 : -std::numeric_limits<double>::infinity();
    const double xb = rb.test.r2_defined ? rb.test.r2 : -std::numeric_limits<double>::infinity();
    return xa > xb;
  });
  std::vector<ComparisonRow> sorted;
  for (std::size_t i : order) sorted.push_back(std::move(rows[i]));
  return sorted;
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json j{{"n", m.n}, {"mse", m.mse}, {"rmse", m.rmse}, {"split_id", m.split_id}};
  j["r2"] = m.r2_defined ? nlohmann::json(m.r2) : nlohmann::json(nullptr);
  if (!m.r2_defined) j["flag"] = "r2_undefined";
  return j;
}

nlohmann::json to_json(const ResidualReport& r) {
  nlohmann::json j{{"n", r.residuals.size()},
                   {"degenerate", r.degenerate},
                   {"skewness", r.skewness},
                   {"bandwidth", r.bandwidth},
                   {"residual_vs_predicted_slope", r.residual_vs_predicted_slope},
                   {"histogram", {{"edges", r.histogram.edges}, {"counts", r.histogram.counts}}}};
  if (!r.residuals.empty()) {
    const auto [lo, hi] = std::minmax_element(r.residuals.begin(), r.residuals.end());
    j["min"] = *lo;
    j["max"] = *hi;
    j["mean"] = mean(r.residuals);
  }
  return j;
}

nlohmann::json to_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"imputer", r.imputer},   {"selector", r.selector},
                     {"model", r.model_id},    {"features", r.features},
                     {"failed", r.failed},     {"provenance", r.provenance}};
    if (r.failed) {
      j["error"] = r.error;
    } else {
      j["metrics"] = to_json(r.test);
    }
    out.push_back(std::move(j));
  }
  return out;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << "imputer,selector,model,rmse,mse,r2,n,status\n";
  for (const auto& r : rows) {
    out << r.imputer << ',' << r.selector << ',' << r.model_id << ',';
    if (r.failed) {
      out << ",,,,failed\n";
      continue;
    }
    out << format_double(r.test.rmse) << ',' << format_double(r.test.mse) << ','
        << (r.test.r2_defined ? format_double(r.test.r2) : "") << ',' << r.test.n << ",ok\n";
  }
}

void write_residual_csvs(const ResidualReport& r, const std::filesystem::path& dir,
                         const std::string& prefix) {
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / (prefix + name), std::ios::binary);
    if (!out) throw ArtifactError("cannot write " + (dir / (prefix + name)).string());
    return out;
  };
  {
    auto out = open("residuals.csv");
    out << "predicted,residual\n";
    for (std::size_t i = 0; i < r.residuals.size(); ++i) {
      out << format_double(r.predicted[i]) << ',' << format_double(r.residuals[i]) << '\n';
    }
  }
  write_histogram_csv(r.histogram, dir / (prefix + "residual_hist.csv"));
  {
    auto out = open("residual_kde.csv");
    out << "x,density\n";
    for (std::size_t i = 0; i < r.kde_grid.size(); ++i) {
      out << format_double(r.kde_grid[i]) << ',' << format_double(r.kde_density[i]) << '\n';
    }
  }
  {
    auto out = open("residual_qq.csv");
    out << "theoretical,sample\n";
    for (std::size_t i = 0; i < r.qq_sample.size(); ++i) {
      out << format_double(r.qq_theoretical[i]) << ',' << format_double(r.qq_sample[i]) << '\n';
    }
  }
}

}  // namespace tabreg

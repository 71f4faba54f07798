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

#include "tabreg/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include <boost/math/distributions/binomial.hpp>

#include "gower.hpp"
#include "tabreg/kernels.hpp"

namespace tabreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool constant(std::span<const double> v) {
  for (double x : v) {
    if (x != v.front()) return false;
  }
  return true;
}

// Feature/target values on rows where both are present.
struct PairedColumn {
  std::vector<double> x;
  std::vector<double> y;
};

PairedColumn paired(const Column& feature, const Column& target) {
  PairedColumn p;
  for (std::size_t r = 0; r < feature.values.size(); ++r) {
    if (!feature.present(r) || !target.present(r)) continue;
    p.x.push_back(feature.values[r]);
    p.y.push_back(target.values[r]);
  }
  return p;
}

struct FeatureSet {
  std::vector<std::size_t> indices;
  std::vector<std::string> names;
  std::size_t target = 0;
};

FeatureSet feature_set(const Table& table, std::string_view target) {
  FeatureSet fs;
  fs.target = table.index_of(target);
  for (std::size_t c : table.feature_indices()) {
    if (c == fs.target) continue;
    fs.indices.push_back(c);
    fs.names.push_back(table.column(c).meta.name);
  }
  return fs;
}

std::vector<int> codes_of(std::span<const double> v) {
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<int>(v[i]);
  return out;
}

double r2_score(std::span<const double> y, std::span<const double> pred) {
  const double m = mean(y);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
    ss_tot += (y[i] - m) * (y[i] - m);
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : kNaN;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double kendall(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("kendall: length mismatch");
  double concordant = 0.0, discordant = 0.0, tie_x = 0.0, tie_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        tie_x += 1.0;
      } else if (dy == 0.0) {
        tie_y += 1.0;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double denom =
      std::sqrt((concordant + discordant + tie_x) * (concordant + discordant + tie_y));
  return denom > 0.0 ? (concordant - discordant) / denom : kNaN;
}

std::vector<int> equal_frequency_bins(std::span<const double> x, std::size_t bins) {
  if (bins < 1) throw ValidationError("equal_frequency_bins: bins must be >= 1");
  const auto ranks = average_ranks(x);
  const double n = static_cast<double>(x.size());
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto b = static_cast<std::size_t>(std::floor((ranks[i] - 1.0) * static_cast<double>(bins) / n));
    out[i] = static_cast<int>(std::min(b, bins - 1));
  }
  return out;
}

double mutual_information(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ValidationError("mutual_information: length mismatch");
  if (a.empty()) return 0.0;
  auto dense = [](std::span<const int> v, std::size_t& levels) {
    std::vector<int> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    levels = sorted.size();
    std::vector<std::size_t> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) -
                                        sorted.begin());
    }
    return out;
  };
  std::size_t la = 0, lb = 0;
  const auto da = dense(a, la);
  const auto db = dense(b, lb);
  std::vector<double> joint(la * lb, 0.0), pa(la, 0.0), pb(lb, 0.0);
  for (std::size_t i = 0; i < da.size(); ++i) {
    joint[da[i] * lb + db[i]] += 1.0;
    pa[da[i]] += 1.0;
    pb[db[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (std::size_t i = 0; i < la; ++i) {
    for (std::size_t j = 0; j < lb; ++j) {
      const double c = joint[i * lb + j];
      if (c > 0.0) mi += c / n * std::log(c * n / (pa[i] * pb[j]));
    }
  }
  return std::max(mi, 0.0);
}

double anova_f(std::span<const double> values, std::span<const int> groups) {
  if (values.size() != groups.size()) throw ValidationError("anova_f: length mismatch");
  std::vector<int> labels(groups.begin(), groups.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const std::size_t k = labels.size();
  if (k < 2) return kNaN;
  std::vector<double> sum(k, 0.0), count(k, 0.0);
  std::vector<std::size_t> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    g[i] = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), groups[i]) -
                                    labels.begin());
    sum[g[i]] += values[i];
    count[g[i]] += 1.0;
  }
  const double grand = mean(values);
  double ssb = 0.0, ssw = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double m = sum[j] / count[j];
    ssb += count[j] * (m - grand) * (m - grand);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double m = sum[g[i]] / count[g[i]];
    ssw += (values[i] - m) * (values[i] - m);
  }
  const double df_between = static_cast<double>(k - 1);
  const double df_within = static_cast<double>(values.size() - k);
  // Rounding noise in the group means must not turn equal groups into a
  // tiny nonzero numerator.
  if (ssb <= 1e-14 * (ssb + ssw + grand * grand * static_cast<double>(values.size()))) {
    ssb = 0.0;
  }
  if (ssw <= 0.0 || df_within <= 0.0) {
    return ssb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return (ssb / df_between) / (ssw / df_within);
}

SelectorRanking correlation_scores(const Table& table, std::string_view target,
                                   CorrelationMethod method) {
  const FeatureSet fs = feature_set(table, target);
  const Column& y = table.column(fs.target);
  std::vector<double> scores(fs.indices.size(), 0.0);
  std::vector<std::string> flags(fs.indices.size());
  parallel_for(fs.indices.size(), [&](std::size_t f) {
    const PairedColumn p = paired(table.column(fs.indices[f]), y);
    if (p.x.size() < 3) {
      flags[f] = "insufficient_pairs";
      return;
    }
    if (constant(p.x)) {
      flags[f] = "zero_variance";
      return;
    }
    double c = kNaN;
    switch (method) {
      case CorrelationMethod::pearson: c = pearson(p.x, p.y); break;
      case CorrelationMethod::spearman: c = spearman(p.x, p.y); break;
      case CorrelationMethod::kendall: c = kendall(p.x, p.y); break;
    }
    if (std::isnan(c)) {
      flags[f] = "undefined";
      return;
    }
    scores[f] = std::fabs(c);
  });
  const char* id = method == CorrelationMethod::pearson    ? "pearson"
                   : method == CorrelationMethod::spearman ? "spearman"
                                                           : "kendall";
  return make_ranking(id, fs.names, std::move(scores), std::move(flags));
}

SelectorRanking mutual_information_scores(const Table& table, std::string_view target,
                                          std::size_t bins) {
  const FeatureSet fs = feature_set(table, target);
  const Column& y = table.column(fs.target);
  std::vector<double> scores(fs.indices.size(), 0.0);
  std::vector<std::string> flags(fs.indices.size());
  parallel_for(fs.indices.size(), [&](std::size_t f) {
    const Column& col = table.column(fs.indices[f]);
    const PairedColumn p = paired(col, y);
    if (p.x.empty()) {
      flags[f] = "insufficient_pairs";
      return;
    }
    const auto a = is_discrete(col.meta.kind) ? codes_of(p.x) : equal_frequency_bins(p.x, bins);
    const auto b = is_discrete(y.meta.kind) ? codes_of(p.y) : equal_frequency_bins(p.y, bins);
    scores[f] = mutual_information(a, b);
  });
  return make_ranking("mutual_information", fs.names, std::move(scores), std::move(flags));
}

SelectorRanking anova_f_scores(const Table& table, std::string_view target, std::size_t bins) {
  const FeatureSet fs = feature_set(table, target);
  const Column& y = table.column(fs.target);
  std::vector<double> scores(fs.indices.size(), 0.0);
  std::vector<std::string> flags(fs.indices.size());
  parallel_for(fs.indices.size(), [&](std::size_t f) {
    const Column& col = table.column(fs.indices[f]);
    const PairedColumn p = paired(col, y);
    const auto groups =
        is_discrete(col.meta.kind) ? codes_of(p.x) : equal_frequency_bins(p.x, bins);
    const double fstat = anova_f(p.y, groups);
    if (std::isnan(fstat)) {
      flags[f] = "single_group";
    } else if (std::isinf(fstat)) {
      scores[f] = kAnovaCap;
      flags[f] = "capped";
    } else {
      scores[f] = std::min(fstat, kAnovaCap);
      if (fstat >= kAnovaCap) flags[f] = "capped";
    }
  });
  return make_ranking("anova_f", fs.names, std::move(scores), std::move(flags));
}

SelectorRanking relief_f_scores(const Table& table, std::string_view target,
                                std::size_t n_neighbors, std::size_t n_samples, uint64_t seed) {
  if (n_neighbors < 1) throw ValidationError("relief_f: n_neighbors must be >= 1");
  const FeatureSet fs = feature_set(table, target);
  const Column& ycol = table.column(fs.target);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (ycol.present(r)) rows.push_back(r);
  }
  if (rows.size() < 2) throw ValidationError("relief_f: need at least two rows with a target");
  const Table sub = table.select_rows(rows);
  const detail::GowerData g = detail::gower_data(sub, fs.indices);
  const std::size_t n = rows.size();
  const std::size_t p = fs.indices.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = ycol.values[rows[i]];
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  const double yrange = *yhi - *ylo;

  std::vector<std::size_t> samples(n);
  std::iota(samples.begin(), samples.end(), 0);
  if (n_samples > 0 && n_samples < n) {
    Rng rng(seed);
    samples = permutation(n, rng);
    samples.resize(n_samples);
  }
  const std::size_t m = samples.size();
  const std::size_t k = std::min(n_neighbors, n - 1);

  std::vector<std::vector<std::size_t>> neighbours(m);
  parallel_for(m, [&](std::size_t s) {
    const std::size_t i = samples[s];
    std::vector<double> d(n);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == i) continue;
      const auto gs = kernels::gower(g.x.row(i), g.x.row(r), g.categorical);
      d[r] = gs.count > 0.0 ? gs.sum / gs.count : 1.0;
    }
    std::vector<std::size_t> order;
    order.reserve(n - 1);
    for (std::size_t r = 0; r < n; ++r) {
      if (r != i) order.push_back(r);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (d[a] != d[b]) return d[a] < d[b];
                        return a < b;
                      });
    order.resize(k);
    neighbours[s] = std::move(order);
  });

  const double w = 1.0 / static_cast<double>(k);
  double n_dc = 0.0;
  std::vector<double> n_da(p, 0.0), n_dcda(p, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    const std::size_t i = samples[s];
    for (std::size_t j : neighbours[s]) {
      const double dc = yrange > 0.0 ? std::fabs(y[i] - y[j]) / yrange : 0.0;
      n_dc += dc * w;
      for (std::size_t f = 0; f < p; ++f) {
        const double a = g.x(i, f), b = g.x(j, f);
        if (std::isnan(a) || std::isnan(b)) continue;
        const double da = g.categorical[f] != 0.0 ? (a != b ? 1.0 : 0.0) : std::fabs(a - b);
        n_da[f] += da * w;
        n_dcda[f] += dc * da * w;
      }
    }
  }
  std::vector<double> scores(p, kNaN);
  const double md = static_cast<double>(m);
  if (n_dc > 0.0 && md - n_dc > 0.0) {
    for (std::size_t f = 0; f < p; ++f) {
      scores[f] = n_dcda[f] / n_dc - (n_da[f] - n_dcda[f]) / (md - n_dc);
    }
  }
  return make_ranking("relief_f", fs.names, std::move(scores));
}

std::vector<std::string> select_k_best(const SelectorRanking& ranking, std::size_t k) {
  if (k < 1 || k > ranking.entries.size()) {
    throw ValidationError("select_k_best: k must be in [1, feature count]");
  }
  return ranking.top(k);
}

double cv_r2(const ModelFactory& factory, const Matrix& x, std::span<const double> y,
             std::size_t folds, uint64_t seed) {
  if (folds < 2 || folds > x.rows()) throw ValidationError("cv_r2: bad fold count");
  const auto fold = fold_assignment(x.rows(), folds, seed);
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    std::vector<double> ytr, yte;
    for (auto i : train) ytr.push_back(y[i]);
    for (auto i : test) yte.push_back(y[i]);
    if (constant(yte)) continue;
    std::vector<double> pred;
    if (x.cols() == 0) {
      pred.assign(test.size(), mean(ytr));
    } else {
      const Model model = factory(x.select_rows(train), ytr);
      pred = predict(model, x.select_rows(test));
    }
    total += r2_score(yte, pred);
    ++used;
  }
  return used > 0 ? total / static_cast<double>(used) : 0.0;
}

ForwardSelection forward_select(const Table& table, std::string_view target,
                                const ModelFactory& factory, std::size_t k,
                                std::size_t cv_folds, uint64_t seed) {
  const Dataset ds = to_dataset(table, target);
  const std::size_t p = ds.x.cols();
  if (k < 1 || k > p) throw ValidationError("forward_select: k must be in [1, feature count]");
  ForwardSelection out;
  out.baseline_r2 = cv_r2(factory, Matrix(ds.x.rows(), 0), ds.y, cv_folds, seed);
  double current = out.baseline_r2;
  std::vector<std::size_t> chosen;
  std::vector<char> used(p, 0);
  while (chosen.size() < k) {
    std::vector<double> score(p, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < p; ++j) {
      if (!used[j]) cand.push_back(j);
    }
    for (std::size_t j : cand) {
      std::vector<std::size_t> cols = chosen;
      cols.push_back(j);
      score[j] = cv_r2(factory, ds.x.select_columns(cols), ds.y, cv_folds, seed);
    }
    std::size_t best = cand.front();
    for (std::size_t j : cand) {
      if (score[j] > score[best]) best = j;
    }
    if (!(score[best] > current)) break;
    current = score[best];
    chosen.push_back(best);
    used[best] = 1;
    out.features.push_back(ds.feature_names[best]);
    out.cv_r2.push_back(current);
  }
  return out;
}

std::vector<std::string> rfe(const Table& table, std::string_view target,
                             const ModelFactory& factory, std::size_t k, std::size_t step) {
  const Dataset ds = to_dataset(table, target);
  if (k < 1 || k >= ds.x.cols()) throw ValidationError("rfe: k must be in [1, feature count)");
  if (step < 1) throw ValidationError("rfe: step must be >= 1");
  std::vector<std::size_t> current(ds.x.cols());
  std::iota(current.begin(), current.end(), 0);
  while (current.size() > k) {
    const Model model = factory(ds.x.select_columns(current), ds.y);
    const auto imp = feature_importance(model);
    std::vector<std::size_t> order(current.size());
    std::iota(order.begin(), order.end(), 0);
    // Least important first; equal importance drops the later column first.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (imp[a] != imp[b]) return imp[a] < imp[b];
      return a > b;
    });
    const std::size_t drop = std::min(step, current.size() - k);
    std::vector<char> gone(current.size(), 0);
    for (std::size_t i = 0; i < drop; ++i) gone[order[i]] = 1;
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (!gone[i]) next.push_back(current[i]);
    }
    current = std::move(next);
  }
  std::vector<std::string> out;
  for (std::size_t j : current) out.push_back(ds.feature_names[j]);
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::confirmed: return "confirmed";
    case Verdict::tentative: return "tentative";
    case Verdict::rejected: return "rejected";
  }
  return "tentative";
}

std::vector<std::string> BorutaVerdict::confirmed() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (verdicts[i] == Verdict::confirmed) out.push_back(features[i]);
  }
  return out;
}

BorutaVerdict boruta(const Table& table, std::string_view target, const GbrParams& params,
                     double alpha, std::size_t max_rounds, uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("boruta: alpha must be in (0, 1)");
  if (max_rounds < 1) throw ValidationError("boruta: max_rounds must be >= 1");
  const Dataset ds = to_dataset(table, target);
  const std::size_t p = ds.x.cols();
  const std::size_t n = ds.x.rows();
  BorutaVerdict v;
  v.features = ds.feature_names;
  v.verdicts.assign(p, Verdict::tentative);
  v.hits.assign(p, 0);
  v.rounds_seen.assign(p, 0);
  v.alpha = alpha;

  for (std::size_t round = 1; round <= max_rounds; ++round) {
    std::vector<std::size_t> active, open;
    for (std::size_t j = 0; j < p; ++j) {
      if (v.verdicts[j] != Verdict::rejected) active.push_back(j);
      if (v.verdicts[j] == Verdict::tentative) open.push_back(j);
    }
    if (open.empty()) break;
    v.n_rounds = round;
    const uint64_t round_seed = derive_seed(seed, static_cast<uint64_t>(round));
    Rng rng(derive_seed(round_seed, "shadows"));
    const std::size_t a = active.size();
    Matrix x(n, a + p);
    for (std::size_t c = 0; c < a; ++c) {
      for (std::size_t i = 0; i < n; ++i) x(i, c) = ds.x(i, active[c]);
    }
    for (std::size_t c = 0; c < p; ++c) {
      const auto perm = permutation(n, rng);
      for (std::size_t i = 0; i < n; ++i) x(i, a + c) = ds.x(perm[i], c);
    }
    GbrParams gp = params;
    gp.seed = derive_seed(round_seed, "model");
    const auto imp = fit_gbr(x, ds.y, gp).gain_importance();
    const double max_shadow = *std::max_element(imp.begin() + static_cast<std::ptrdiff_t>(a), imp.end());
    for (std::size_t c = 0; c < a; ++c) {
      const std::size_t j = active[c];
      v.rounds_seen[j] += 1;
      if (imp[c] > max_shadow) v.hits[j] += 1;
    }
    // Bonferroni over the features still under test.
    const double level = alpha / (2.0 * static_cast<double>(open.size()));
    for (std::size_t j : open) {
      const auto trials = static_cast<double>(v.rounds_seen[j]);
      const auto h = static_cast<double>(v.hits[j]);
      const boost::math::binomial_distribution<double> dist(trials, 0.5);
      const double p_lower = boost::math::cdf(dist, h);
      const double p_upper = h > 0.0 ? boost::math::cdf(boost::math::complement(dist, h - 1.0)) : 1.0;
      if (p_upper < level) {
        v.verdicts[j] = Verdict::confirmed;
      } else if (p_lower < level) {
        v.verdicts[j] = Verdict::rejected;
      }
    }
  }
  return v;
}

nlohmann::json to_json(const BorutaVerdict& v) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < v.features.size(); ++i) {
    features.push_back({{"feature", v.features[i]},
                        {"verdict", to_string(v.verdicts[i])},
                        {"hits", v.hits[i]},
                        {"rounds", v.rounds_seen[i]}});
  }
  return {{"alpha", v.alpha}, {"n_rounds", v.n_rounds}, {"features", std::move(features)}};
}

SelectorRanking embedded_scores(const Table& table, std::string_view target,
                                EmbeddedMethod method, uint64_t seed,
                                const GbrParams& tree_params) {
  const Dataset ds = to_dataset(table, target);
  std::vector<double> scores(ds.x.cols(), 0.0);
  const char* id = "tree_gain";
  if (method == EmbeddedMethod::tree_gain) {
    GbrParams gp = tree_params;
    gp.seed = seed;
    scores = fit_gbr(ds.x, ds.y, gp).gain_importance();
  } else {
    double ratio = 1.0;
    id = "lasso";
    if (method == EmbeddedMethod::ridge) {
      ratio = 0.0;
      id = "ridge";
    } else if (method == EmbeddedMethod::elastic_net) {
      ratio = 0.5;
      id = "elastic_net";
    }
    const std::size_t folds = std::min<std::size_t>(5, ds.x.rows());
    const PenaltySearch search = cross_validate_penalty(ds.x, ds.y, ratio, folds, seed);
    const LinearModel m =
        fit_linear(ds.x, ds.y, search.best_penalty * ratio, search.best_penalty * (1.0 - ratio));
    for (std::size_t j = 0; j < scores.size(); ++j) scores[j] = std::fabs(m.fitted_coefficients[j]);
  }
  return make_ranking(id, ds.feature_names, std::move(scores));
}

SelectorRanking aggregate_rankings(const std::vector<SelectorRanking>& rankings) {
  if (rankings.empty()) throw ValidationError("aggregate_rankings: no rankings");
  const auto& universe = rankings.front().universe;
  const std::set<std::string> expected(universe.begin(), universe.end());
  std::vector<double> points(universe.size(), 0.0);
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < universe.size(); ++i) pos[universe[i]] = i;
  const double n = static_cast<double>(universe.size());
  for (const auto& r : rankings) {
    const std::set<std::string> got(r.universe.begin(), r.universe.end());
    if (got != expected || r.entries.size() != universe.size()) {
      throw ValidationError("aggregate_rankings: '" + r.method_id +
                            "' ranks a different feature universe");
    }
    for (const auto& e : r.entries) points[pos.at(e.feature)] += n - static_cast<double>(e.rank);
  }
  return make_ranking("borda", universe, std::move(points));
}

}  // namespace tabreg

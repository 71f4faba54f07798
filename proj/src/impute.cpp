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

#include "tabreg/impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "gower.hpp"
#include "tabreg/kernels.hpp"

namespace tabreg {

namespace {

std::vector<std::size_t> resolve_targets(const Table& table,
                                         const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) {
    const std::size_t i = table.index_of(n);
    if (std::find(out.begin(), out.end(), i) != out.end()) {
      throw ValidationError("target column '" + n + "' listed twice");
    }
    out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> predictor_columns(const Table& table) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    if (table.column(c).meta.role == Role::feature) out.push_back(c);
  }
  return out;
}

}  // namespace

Table knn_impute(const Table& table, const KnnConfig& config,
                 const std::vector<std::string>& target_columns) {
  const std::size_t n = table.n_rows();
  if (config.k < 1 || config.k + 1 > n) {
    throw ValidationError("knn_impute: k must be in [1, n_rows - 1]");
  }
  const auto targets = resolve_targets(table, target_columns);
  bool any_missing = false;
  for (std::size_t c : targets) {
    const Column& col = table.column(c);
    if (col.missing_count() == n) {
      throw ValidationError("knn_impute: column '" + col.meta.name + "' is entirely missing");
    }
    any_missing = any_missing || col.missing_count() > 0;
  }
  if (!any_missing) return table;

  const auto preds = predictor_columns(table);
  const detail::GowerData g = detail::gower_data(table, preds);
  // Rows that need a neighbour list.
  std::vector<char> needs(n, 0);
  for (std::size_t c : targets) {
    for (std::size_t r = 0; r < n; ++r) needs[r] |= !table.column(c).present(r);
  }
  std::vector<std::vector<double>> dist(n);
  parallel_for(n, [&](std::size_t i) {
    if (!needs[i]) return;
    dist[i].assign(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == i) continue;
      const auto s = kernels::gower(g.x.row(i), g.x.row(r), g.categorical);
      // No shared observed cell: as far apart as Gower allows.
      dist[i][r] = s.count > 0.0 ? s.sum / s.count : 1.0;
    }
  });

  std::vector<Column> cols = table.columns();
  std::vector<std::size_t> order;
  for (std::size_t c : targets) {
    const Column& src = table.column(c);
    Column& dst = cols[c];
    for (std::size_t i = 0; i < n; ++i) {
      if (src.present(i)) continue;
      order.clear();
      for (std::size_t r = 0; r < n; ++r) {
        if (r != i && src.present(r)) order.push_back(r);
      }
      const std::size_t k = std::min(config.k, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](std::size_t a, std::size_t b) {
                          if (dist[i][a] != dist[i][b]) return dist[i][a] < dist[i][b];
                          return a < b;
                        });
      double value = 0.0;
      if (is_discrete(src.meta.kind)) {
        std::map<double, std::size_t> votes;
        for (std::size_t t = 0; t < k; ++t) votes[src.values[order[t]]] += 1;
        std::size_t best = 0;
        for (const auto& [code, count] : votes) {
          if (count > best) {  // map order keeps the lowest code on ties
            best = count;
            value = code;
          }
        }
      } else {
        for (std::size_t t = 0; t < k; ++t) value += src.values[order[t]];
        value /= static_cast<double>(k);
      }
      dst.values[i] = value;
      dst.state[i] = CellState::imputed;
    }
  }
  return Table(n, std::move(cols));
}

void MiceConfig::validate() const {
  if (n_iterations < 1) throw ValidationError("mice: n_iterations must be >= 1");
  if (n_imputations < 1) throw ValidationError("mice: n_imputations must be >= 1");
  if (pmm_donors < 1) throw ValidationError("mice: pmm_donors must be >= 1");
  if (!(ridge >= 0.0)) throw ValidationError("mice: ridge must be >= 0");
}

namespace {

struct MicePlan {
  std::vector<std::size_t> columns;  // all feature columns, working order
  std::vector<std::size_t> visit;    // positions into `columns`, visit order
  std::vector<std::vector<std::size_t>> predictors;  // per visit entry
  Matrix start;                      // mean-filled working data (n x columns)
  std::vector<std::vector<char>> observed;  // per visit entry
};

double abs_corr(const Matrix& w, std::size_t a, std::size_t b, const std::vector<char>& rows) {
  double sa = 0.0, sb = 0.0, m = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (!rows[r]) continue;
    sa += w(r, a);
    sb += w(r, b);
    m += 1.0;
  }
  if (m < 3.0) return 0.0;
  const double ma = sa / m, mb = sb / m;
  double cab = 0.0, caa = 0.0, cbb = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (!rows[r]) continue;
    const double da = w(r, a) - ma, db = w(r, b) - mb;
    cab += da * db;
    caa += da * da;
    cbb += db * db;
  }
  if (caa <= 0.0 || cbb <= 0.0) return 0.0;
  return std::fabs(cab / std::sqrt(caa * cbb));
}

MicePlan plan_mice(const Table& table, const MiceConfig& config,
                   const std::vector<std::size_t>& targets) {
  MicePlan plan;
  plan.columns = predictor_columns(table);
  for (std::size_t c : targets) {
    if (std::find(plan.columns.begin(), plan.columns.end(), c) == plan.columns.end()) {
      plan.columns.push_back(c);
    }
  }
  const std::size_t n = table.n_rows();
  plan.start = Matrix(n, plan.columns.size());
  for (std::size_t j = 0; j < plan.columns.size(); ++j) {
    const Column& col = table.column(plan.columns[j]);
    double s = 0.0, m = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (col.present(r)) {
        s += col.values[r];
        m += 1.0;
      }
    }
    const double fill = m > 0.0 ? s / m : 0.0;
    for (std::size_t r = 0; r < n; ++r) plan.start(r, j) = col.present(r) ? col.values[r] : fill;
  }

  // Descending missingness, ties by column position; complete columns skipped.
  std::vector<std::size_t> pos;
  for (std::size_t c : targets) {
    const auto it = std::find(plan.columns.begin(), plan.columns.end(), c);
    const auto p = static_cast<std::size_t>(it - plan.columns.begin());
    if (table.column(c).missing_count() > 0) pos.push_back(p);
  }
  std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
    return table.column(plan.columns[a]).missing_count() >
           table.column(plan.columns[b]).missing_count();
  });
  plan.visit = pos;

  for (std::size_t p : plan.visit) {
    const Column& col = table.column(plan.columns[p]);
    std::vector<char> obs(n);
    for (std::size_t r = 0; r < n; ++r) obs[r] = col.present(r) ? 1 : 0;
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < plan.columns.size(); ++j) {
      if (j != p) cand.push_back(j);
    }
    if (config.max_predictors > 0 && cand.size() > config.max_predictors) {
      std::vector<double> score(plan.columns.size(), 0.0);
      for (std::size_t j : cand) score[j] = abs_corr(plan.start, p, j, obs);
      std::stable_sort(cand.begin(), cand.end(),
                       [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
      cand.resize(config.max_predictors);
      std::sort(cand.begin(), cand.end());
    }
    plan.predictors.push_back(std::move(cand));
    plan.observed.push_back(std::move(obs));
  }
  return plan;
}

// One conditional update of working column `p` in place.
void update_column(Matrix& w, std::size_t p, const std::vector<std::size_t>& preds,
                   const std::vector<char>& obs, const MiceConfig& config, Rng& rng) {
  const std::size_t n = w.rows();
  std::vector<std::size_t> use;
  std::vector<double> mu, sd;
  std::size_t n_obs = 0;
  for (std::size_t r = 0; r < n; ++r) n_obs += obs[r] ? 1 : 0;
  for (std::size_t j : preds) {
    double s = 0.0, ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (obs[r]) s += w(r, j);
    }
    const double m = s / static_cast<double>(n_obs);
    for (std::size_t r = 0; r < n; ++r) {
      if (obs[r]) ss += (w(r, j) - m) * (w(r, j) - m);
    }
    const double d = std::sqrt(ss / static_cast<double>(n_obs));
    if (d > 1e-12 * (1.0 + std::fabs(m))) {
      use.push_back(j);
      mu.push_back(m);
      sd.push_back(d);
    }
  }
  const auto q = static_cast<Eigen::Index>(use.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), q);
  for (std::size_t r = 0; r < n; ++r) {
    for (Eigen::Index j = 0; j < q; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      x(static_cast<Eigen::Index>(r), j) = (w(r, use[jj]) - mu[jj]) / sd[jj];
    }
  }
  double ymean = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (obs[r]) ymean += w(r, p);
  }
  ymean /= static_cast<double>(n_obs);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  if (q > 0) {
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(q);
    for (std::size_t r = 0; r < n; ++r) {
      if (!obs[r]) continue;
      const auto row = x.row(static_cast<Eigen::Index>(r));
      xtx.selfadjointView<Eigen::Lower>().rankUpdate(row.transpose());
      xty += row.transpose() * (w(r, p) - ymean);
    }
    xtx = xtx.selfadjointView<Eigen::Lower>();
    xtx.diagonal().array() += config.ridge;
    beta = xtx.ldlt().solve(xty);
  }
  std::vector<double> pred(n);
  for (std::size_t r = 0; r < n; ++r) {
    pred[r] = ymean + (q > 0 ? x.row(static_cast<Eigen::Index>(r)).dot(beta) : 0.0);
  }

  if (config.conditional_model == ConditionalModel::ridge_linear) {
    double sse = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (obs[r]) sse += (w(r, p) - pred[r]) * (w(r, p) - pred[r]);
    }
    const double df = static_cast<double>(n_obs) - static_cast<double>(q) - 1.0;
    const double sigma = std::sqrt(sse / (df > 0.0 ? df : static_cast<double>(n_obs)));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
      if (!obs[r]) w(r, p) = pred[r] + sigma * noise(rng);
    }
    return;
  }

  // Predictive mean matching: donors sorted by predicted value.
  std::vector<std::size_t> donors;
  for (std::size_t r = 0; r < n; ++r) {
    if (obs[r]) donors.push_back(r);
  }
  std::stable_sort(donors.begin(), donors.end(),
                   [&](std::size_t a, std::size_t b) { return pred[a] < pred[b]; });
  std::vector<double> dpred(donors.size());
  for (std::size_t i = 0; i < donors.size(); ++i) dpred[i] = pred[donors[i]];
  const std::size_t d = std::min(config.pmm_donors, donors.size());
  for (std::size_t r = 0; r < n; ++r) {
    if (obs[r]) continue;
    // Two-pointer expansion around the insertion point picks the d closest.
    auto hi = static_cast<std::size_t>(std::lower_bound(dpred.begin(), dpred.end(), pred[r]) -
                                       dpred.begin());
    std::size_t lo = hi;
    std::vector<std::size_t> chosen;
    while (chosen.size() < d) {
      const bool can_lo = lo > 0;
      const bool can_hi = hi < dpred.size();
      if (can_lo && (!can_hi || pred[r] - dpred[lo - 1] <= dpred[hi] - pred[r])) {
        chosen.push_back(donors[--lo]);
      } else {
        chosen.push_back(donors[hi++]);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, chosen.size() - 1);
    w(r, p) = w(chosen[pick(rng)], p);
  }
}

}  // namespace

std::vector<Table> mice_impute(const Table& table, const MiceConfig& config,
                               const std::vector<std::string>& target_columns) {
  config.validate();
  const auto targets = resolve_targets(table, target_columns);
  for (std::size_t c : targets) {
    const Column& col = table.column(c);
    if (col.meta.kind != Kind::continuous) {
      throw ValidationError("mice_impute: column '" + col.meta.name + "' is not continuous");
    }
    if (table.n_rows() - col.missing_count() < 2) {
      throw ValidationError("mice_impute: column '" + col.meta.name +
                            "' needs at least two observed values");
    }
  }
  const MicePlan plan = plan_mice(table, config, targets);
  std::vector<Table> out(config.n_imputations);
  parallel_for(config.n_imputations, [&](std::size_t m) {
    Rng rng(derive_seed(config.seed, static_cast<uint64_t>(m)));
    Matrix w = plan.start;
    for (std::size_t it = 0; it < config.n_iterations; ++it) {
      for (std::size_t v = 0; v < plan.visit.size(); ++v) {
        update_column(w, plan.visit[v], plan.predictors[v], plan.observed[v], config, rng);
      }
    }
    std::vector<Column> cols = table.columns();
    for (std::size_t v = 0; v < plan.visit.size(); ++v) {
      const std::size_t p = plan.visit[v];
      Column& col = cols[plan.columns[p]];
      for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (col.present(r)) continue;
        col.values[r] = w(r, p);
        col.state[r] = CellState::imputed;
      }
    }
    out[m] = Table(table.n_rows(), std::move(cols));
  });
  return out;
}

Table pool_imputations(const std::vector<Table>& tables) {
  if (tables.empty()) throw ValidationError("pool_imputations: no tables");
  const Table& first = tables.front();
  for (const auto& t : tables) {
    if (t.n_rows() != first.n_rows() || t.n_cols() != first.n_cols()) {
      throw ValidationError("pool_imputations: shape mismatch");
    }
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      if (t.column(c).meta.name != first.column(c).meta.name ||
          t.column(c).state != first.column(c).state) {
        throw ValidationError("pool_imputations: masks of origin differ");
      }
    }
  }
  std::vector<Column> cols = first.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Column& col = cols[c];
    for (std::size_t r = 0; r < first.n_rows(); ++r) {
      if (col.state[r] != CellState::imputed) continue;
      double s = 0.0;
      for (const auto& t : tables) s += t.column(c).values[r];
      double v = s / static_cast<double>(tables.size());
      if (is_discrete(col.meta.kind)) v = std::round(v);
      col.values[r] = v;
    }
  }
  return Table(first.n_rows(), std::move(cols));
}

Table mean_impute(const Table& table, const std::vector<std::string>& target_columns) {
  const auto targets = resolve_targets(table, target_columns);
  std::vector<Column> cols = table.columns();
  for (std::size_t c : targets) {
    Column& col = cols[c];
    double s = 0.0, m = 0.0;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      if (col.present(r)) {
        s += col.values[r];
        m += 1.0;
      }
    }
    if (m == 0.0) {
      throw ValidationError("mean_impute: column '" + col.meta.name + "' is entirely missing");
    }
    double fill = s / m;
    if (is_discrete(col.meta.kind)) fill = std::round(fill);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      if (col.present(r)) continue;
      col.values[r] = fill;
      col.state[r] = CellState::imputed;
    }
  }
  return Table(table.n_rows(), std::move(cols));
}

namespace {

std::vector<std::string> missing_columns(const Table& table, bool discrete) {
  std::vector<std::string> out;
  for (const auto& col : table.columns()) {
    if (col.meta.role != Role::feature || col.missing_count() == 0) continue;
    if (is_discrete(col.meta.kind) == discrete) out.push_back(col.meta.name);
  }
  return out;
}

}  // namespace

std::vector<std::string> missing_discrete_columns(const Table& table) {
  return missing_columns(table, true);
}

std::vector<std::string> missing_continuous_columns(const Table& table) {
  return missing_columns(table, false);
}

nlohmann::json to_json(const MiceConfig& c) {
  return {{"n_iterations", c.n_iterations},
          {"n_imputations", c.n_imputations},
          {"conditional_model", c.conditional_model == ConditionalModel::ridge_linear
                                    ? "ridge_linear"
                                    : "predictive_mean_matching"},
          {"pmm_donors", c.pmm_donors},
          {"ridge", c.ridge},
          {"max_predictors", c.max_predictors},
          {"seed", c.seed}};
}

MiceConfig mice_config_from_json(const nlohmann::json& j) {
  MiceConfig c;
  try {
    c.n_iterations = j.value("n_iterations", c.n_iterations);
    c.n_imputations = j.value("n_imputations", c.n_imputations);
    const std::string model = j.value("conditional_model", std::string("predictive_mean_matching"));
    if (model == "ridge_linear") {
      c.conditional_model = ConditionalModel::ridge_linear;
    } else if (model == "predictive_mean_matching" || model == "pmm") {
      c.conditional_model = ConditionalModel::predictive_mean_matching;
    } else {
      throw ValidationError("unknown conditional_model '" + model + "'");
    }
    c.pmm_donors = j.value("pmm_donors", c.pmm_donors);
    c.ridge = j.value("ridge", c.ridge);
    c.max_predictors = j.value("max_predictors", c.max_predictors);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed MICE config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace tabreg

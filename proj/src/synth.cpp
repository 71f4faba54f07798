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

#include "tabreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include <boost/math/distributions/normal.hpp>

namespace tabreg {

std::string_view to_string(EffectKind k) {
  switch (k) {
    case EffectKind::linear: return "linear";
    case EffectKind::threshold: return "threshold";
    case EffectKind::nonmonotone: return "nonmonotone";
    case EffectKind::saturating: return "saturating";
    case EffectKind::interaction: return "interaction";
  }
  return "linear";
}

EffectKind parse_effect_kind(std::string_view s) {
  for (auto k : {EffectKind::linear, EffectKind::threshold, EffectKind::nonmonotone,
                 EffectKind::saturating, EffectKind::interaction}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown effect kind '" + std::string(s) + "'");
}

double Effect::operator()(double x, double partner_z) const {
  switch (kind) {
    case EffectKind::linear: return a * (x - b);
    case EffectKind::threshold: return x > b ? a : 0.0;
    case EffectKind::nonmonotone: {
      const double z = (x - b) / c;
      return -a * z * z;
    }
    case EffectKind::saturating: return a * std::tanh((x - b) / c);
    case EffectKind::interaction: return a * ((x - b) / c) * partner_z;
  }
  return 0.0;
}

double GroundTruth::effect(const std::string& feature, double x) const {
  for (const auto& s : signals) {
    if (s.name == feature) return s.effect(x, 0.0);
  }
  return 0.0;
}

void CohortSpec::validate() const {
  if (n_rows < 1) throw ValidationError("cohort: n_rows must be >= 1");
  if (!(noise_sd >= 0.0)) throw ValidationError("cohort: noise_sd must be >= 0");
  std::set<std::string> names{target_name};
  std::set<std::string> complete;
  for (const auto& s : signals) {
    if (!names.insert(s.name).second) throw ValidationError("cohort: duplicate name " + s.name);
    if (!(s.sd >= 0.0) || s.lo > s.hi) throw ValidationError("cohort: bad distribution for " + s.name);
    if (!(s.missing_rate >= 0.0 && s.missing_rate < 1.0)) {
      throw ValidationError("cohort: missing rate must be in [0, 1) for " + s.name);
    }
    if (s.effect.kind != EffectKind::threshold && s.effect.kind != EffectKind::linear &&
        !(s.effect.c > 0.0)) {
      throw ValidationError("cohort: effect scale must be positive for " + s.name);
    }
    if (s.missing_rate == 0.0) complete.insert(s.name);
  }
  for (const auto& s : signals) {
    if (s.effect.kind != EffectKind::interaction) continue;
    const bool found = std::any_of(signals.begin(), signals.end(),
                                   [&](const SignalFeature& o) { return o.name == s.effect.partner; });
    if (!found) throw ValidationError("cohort: unknown interaction partner for " + s.name);
  }
  for (const auto& b : blocks) {
    if (b.prefix.empty()) throw ValidationError("cohort: block prefix must be non-empty");
    for (std::size_t i = 0; i < b.count; ++i) {
      if (!names.insert(b.prefix + std::to_string(i)).second) {
        throw ValidationError("cohort: duplicate column from block " + b.prefix);
      }
    }
    if (!(b.loading_min >= 0.0 && b.loading_min <= b.loading_max && b.loading_max < 1.0)) {
      throw ValidationError("cohort: block loadings must satisfy 0 <= min <= max < 1");
    }
    if (b.loading_max > 0.0 && n_factors == 0) {
      throw ValidationError("cohort: loadings need at least one latent factor");
    }
    if (!(b.missing_rate >= 0.0 && b.missing_rate < 1.0)) {
      throw ValidationError("cohort: block missing_rate must be in [0, 1)");
    }
    if (!(b.rate_min >= 0.0 && b.rate_min <= b.rate_max && b.rate_max <= 1.0)) {
      throw ValidationError("cohort: block rate bounds must satisfy 0 <= min <= max <= 1");
    }
    const bool has_missing = b.missing_cells > 0 || b.missing_rate > 0.0;
    if (has_missing && b.mechanism == Mechanism::mar && !complete.count(b.mar_driver)) {
      throw ValidationError("cohort: MAR driver '" + b.mar_driver +
                            "' must be an earlier fully observed column");
    }
    if (!has_missing) {
      for (std::size_t i = 0; i < b.count; ++i) complete.insert(b.prefix + std::to_string(i));
    }
  }
}

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> standardized(const std::vector<double>& v) {
  const double m = mean(v);
  const double sd = std::sqrt(sample_variance(v));
  std::vector<double> z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = sd > 0.0 ? (v[i] - m) / sd : 0.0;
  return z;
}

// Exact per-column masked-cell counts for a block.
std::vector<std::size_t> allocate_missing(const ColumnBlock& b, std::size_t n, Rng& rng) {
  const auto nd = static_cast<double>(n);
  const std::size_t lo =
      b.rate_min > 0.0 ? std::min(n, static_cast<std::size_t>(std::floor(b.rate_min * nd)) + 1) : 0;
  const auto hard_cap = static_cast<std::size_t>(std::floor(b.rate_max * nd));
  std::uniform_real_distribution<double> u(b.rate_min, b.rate_max);
  std::vector<std::size_t> floor_(b.count, lo), cap(b.count);
  for (auto& c : cap) c = std::max(lo, static_cast<std::size_t>(std::floor(u(rng) * nd)));
  const std::size_t base = lo * b.count;
  auto capacity = [&] {
    std::size_t s = 0;
    for (auto c : cap) s += c;
    return s;
  };
  if (capacity() < b.missing_cells) std::fill(cap.begin(), cap.end(), std::max(lo, hard_cap));
  if (b.missing_cells < base || b.missing_cells > capacity()) {
    throw ValidationError("cohort: block " + b.prefix + " cannot hold " +
                          std::to_string(b.missing_cells) + " missing cells");
  }
  // Spread the extra cells proportionally to each column's headroom.
  const double extra = static_cast<double>(b.missing_cells - base);
  const double room = static_cast<double>(capacity() - base);
  std::vector<std::size_t> out(b.count);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < b.count; ++j) {
    const double share = room > 0.0 ? extra * static_cast<double>(cap[j] - lo) / room : 0.0;
    const auto whole = static_cast<std::size_t>(std::floor(share));
    out[j] = lo + whole;
    assigned += out[j];
    rem.emplace_back(share - static_cast<double>(whole), j);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; assigned < b.missing_cells; ++i, ++assigned) out[rem[i].second] += 1;
  return out;
}

// Rows to mask: exactly `count` rows, weighted by `weight` when given
// (Efraimidis-Spirakis keys), uniformly otherwise.
std::vector<std::size_t> choose_rows(std::size_t n, std::size_t count,
                                     const std::vector<double>* weight, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weight ? (*weight)[i] : 1.0;
    double r = u(rng);
    if (r <= 0.0) r = 1e-300;
    keys[i] = {std::log(r) / w, i};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<std::size_t> rows(count);
  for (std::size_t i = 0; i < count; ++i) rows[i] = keys[i].second;
  return rows;
}

// Intercept such that the mean of logistic(alpha + s z) equals rate.
double mar_intercept(const std::vector<double>& z, double s, double rate) {
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double m = 0.0;
    for (double v : z) m += logistic(mid + s * v);
    m /= static_cast<double>(z.size());
    (m < rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::string> word_labels(std::size_t levels) {
  static const char* const kWords[] = {"none", "low", "medium", "high", "very_high", "extreme",
                                       "other", "unknown"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < levels; ++i) out.emplace_back(kWords[i % 8]);
  return out;
}

}  // namespace

Cohort generate(const CohortSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_rows;
  Cohort out;
  GroundTruth& truth = out.truth;

  Matrix factors(n, std::max<std::size_t>(spec.n_factors, 1));
  {
    Rng rng(derive_seed(spec.seed, "factors"));
    std::normal_distribution<double> z;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < factors.cols(); ++k) factors(i, k) = z(rng);
    }
  }

  std::map<std::string, std::vector<double>> complete_values;
  std::vector<Column> columns;

  // Signals.
  std::map<std::string, std::vector<double>> signal_values;
  for (const auto& s : spec.signals) {
    Rng rng(derive_seed(spec.seed, "signal:" + s.name));
    std::normal_distribution<double> z(s.mean, s.sd);
    std::vector<double> v(n);
    for (auto& x : v) x = std::clamp(z(rng), s.lo, s.hi);
    signal_values[s.name] = v;
  }
  truth.noiseless_target.assign(n, spec.target_mean);
  for (const auto& s : spec.signals) {
    const auto& v = signal_values[s.name];
    std::vector<double> partner_z(n, 0.0);
    if (s.effect.kind == EffectKind::interaction) partner_z = standardized(signal_values[s.effect.partner]);
    for (std::size_t i = 0; i < n; ++i) truth.noiseless_target[i] += s.effect(v[i], partner_z[i]);
  }

  Column target;
  target.meta.name = spec.target_name;
  target.meta.kind = Kind::continuous;
  target.meta.stage = spec.target_stage;
  target.meta.lineage = spec.target_lineage;
  target.meta.role = Role::target;
  target.values.resize(n);
  target.state.assign(n, CellState::observed);
  {
    Rng rng(derive_seed(spec.seed, "noise"));
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      target.values[i] = std::max(spec.clip_min, truth.noiseless_target[i] + spec.noise_sd * z(rng));
    }
  }
  truth.block_of[spec.target_name] = "target";
  columns.push_back(std::move(target));

  for (const auto& s : spec.signals) {
    Column c;
    c.meta.name = s.name;
    c.meta.kind = Kind::continuous;
    c.meta.stage = s.stage;
    c.meta.lineage = s.lineage;
    c.values = signal_values[s.name];
    c.state.assign(n, CellState::observed);
    if (s.missing_rate > 0.0) {
      Rng rng(derive_seed(spec.seed, "mask:" + s.name));
      std::bernoulli_distribution miss(s.missing_rate);
      for (std::size_t i = 0; i < n; ++i) {
        if (miss(rng)) c.state[i] = CellState::missing;
      }
    } else {
      complete_values[s.name] = c.values;
    }
    truth.signal_features.push_back(s.name);
    truth.true_values[s.name] = c.values;
    truth.block_of[s.name] = "signal";
    columns.push_back(std::move(c));
  }
  truth.signals = spec.signals;

  const boost::math::normal_distribution<double> unit;
  for (const auto& b : spec.blocks) {
    std::vector<Column> made(b.count);
    parallel_for(b.count, [&](std::size_t j) {
      const std::string name = b.prefix + std::to_string(j);
      Rng rng(derive_seed(spec.seed, "column:" + name));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::normal_distribution<double> z;
      const double loading = b.loading_min + (b.loading_max - b.loading_min) * u(rng);
      const std::size_t k = std::uniform_int_distribution<std::size_t>(0, factors.cols() - 1)(rng);
      std::vector<double> latent(n);
      const double rest = std::sqrt(1.0 - loading * loading);
      for (std::size_t i = 0; i < n; ++i) latent[i] = loading * factors(i, k) + rest * z(rng);

      Column& c = made[j];
      c.meta.name = name;
      c.meta.kind = b.kind;
      c.meta.stage = b.stage;
      c.meta.lineage = b.lineage;
      c.values.resize(n);
      c.state.assign(n, CellState::observed);
      if (b.kind == Kind::continuous) {
        const double m = std::round(1.0 + 99.0 * u(rng));
        const double s = m * (0.05 + 0.25 * u(rng));
        for (std::size_t i = 0; i < n; ++i) c.values[i] = std::round((m + s * latent[i]) * 100.0) / 100.0;
      } else {
        const std::size_t levels = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
        std::vector<double> cuts;
        for (std::size_t l = 1; l < levels; ++l) {
          const double p = (static_cast<double>(l) + 0.3 * (u(rng) - 0.5)) / static_cast<double>(levels);
          cuts.push_back(boost::math::quantile(unit, p));
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i < n; ++i) {
          c.values[i] = static_cast<double>(std::upper_bound(cuts.begin(), cuts.end(), latent[i]) - cuts.begin());
        }
        if (b.kind == Kind::nominal) {
          if (b.text_labels) {
            c.meta.labels = word_labels(levels);
            for (std::size_t l = 0; l < levels; ++l) c.meta.labels[l] += "_" + std::to_string(l);
            c.meta.numeric_labels = false;
          } else {
            for (std::size_t l = 0; l < levels; ++l) c.meta.labels.push_back(std::to_string(l + 1));
          }
        }
      }
    });

    const bool has_missing = b.missing_cells > 0 || b.missing_rate > 0.0;
    if (has_missing) {
      Rng alloc_rng(derive_seed(spec.seed, "alloc:" + b.prefix));
      std::vector<std::size_t> counts;
      if (b.missing_cells > 0) counts = allocate_missing(b, n, alloc_rng);
      std::vector<double> driver_z;
      if (b.mechanism == Mechanism::mar) driver_z = standardized(complete_values.at(b.mar_driver));
      std::vector<double> weight;
      if (b.mechanism == Mechanism::mar) {
        for (double v : driver_z) weight.push_back(logistic(b.mar_strength * v));
      }
      const double alpha =
          b.mechanism == Mechanism::mar && b.missing_cells == 0 && b.missing_rate > 0.0
              ? mar_intercept(driver_z, b.mar_strength, b.missing_rate)
              : 0.0;
      parallel_for(b.count, [&](std::size_t j) {
        Column& c = made[j];
        Rng rng(derive_seed(spec.seed, "mask:" + c.meta.name));
        if (b.missing_cells > 0) {
          const auto rows = choose_rows(n, counts[j], b.mechanism == Mechanism::mar ? &weight : nullptr, rng);
          for (auto r : rows) c.state[r] = CellState::missing;
          return;
        }
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double p = b.mechanism == Mechanism::mar
                               ? logistic(alpha + b.mar_strength * driver_z[i])
                               : b.missing_rate;
          if (u(rng) < p) c.state[i] = CellState::missing;
        }
      });
    }
    for (auto& c : made) {
      if (b.record_truth) truth.true_values[c.meta.name] = c.values;
      if (!has_missing) complete_values[c.meta.name] = c.values;
      truth.block_of[c.meta.name] = b.prefix;
      columns.push_back(std::move(c));
    }
  }
  out.table = Table(n, std::move(columns));
  return out;
}

Cohort friedman1(std::size_t n_rows, double noise_sd, uint64_t seed) {
  if (n_rows < 1) throw ValidationError("friedman1: n_rows must be >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Column> cols(11);
  for (std::size_t j = 0; j < 11; ++j) {
    cols[j].meta.name = j == 0 ? "y" : "x" + std::to_string(j);
    cols[j].meta.role = j == 0 ? Role::target : Role::feature;
    cols[j].values.resize(n_rows);
    cols[j].state.assign(n_rows, CellState::observed);
  }
  Cohort out;
  out.truth.noiseless_target.resize(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    double x[10];
    for (double& v : x) v = u(rng);
    const double f = 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) +
                     20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
    for (std::size_t j = 0; j < 10; ++j) cols[j + 1].values[i] = x[j];
    out.truth.noiseless_target[i] = f;
    cols[0].values[i] = f + noise_sd * z(rng);
  }
  for (std::size_t j = 1; j <= 5; ++j) out.truth.signal_features.push_back("x" + std::to_string(j));
  for (const auto& c : cols) {
    out.truth.block_of[c.meta.name] = c.meta.role == Role::target ? "target" : "friedman";
    if (c.meta.role != Role::target) out.truth.true_values[c.meta.name] = c.values;
  }
  out.table = Table(n_rows, std::move(cols));
  return out;
}

double friedman1_mean() {
  // E[sin(pi u v)] = Cin(pi) / pi with Cin(x) = sum_k (-1)^(k+1) x^(2k) / (2k (2k)!).
  const double x = std::numbers::pi;
  double cin = 0.0, term = 1.0;
  for (int k = 1; k < 40; ++k) {
    term *= x * x / ((2.0 * k - 1.0) * (2.0 * k));
    cin += (k % 2 == 1 ? 1.0 : -1.0) * term / (2.0 * k);
  }
  return 10.0 * cin / x + 20.0 / 12.0 + 10.0 * 0.5 + 5.0 * 0.5;
}

// ---- Presets -------------------------------------------------------------

namespace {

SignalFeature signal(std::string name, double m, double sd, double lo, double hi, Effect e,
                     Stage stage, Lineage lineage = Lineage::maternal) {
  SignalFeature s;
  s.name = std::move(name);
  s.mean = m;
  s.sd = sd;
  s.lo = lo;
  s.hi = hi;
  s.effect = std::move(e);
  s.stage = stage;
  s.lineage = lineage;
  return s;
}

ColumnBlock block(std::string prefix, std::size_t count, Kind kind, Stage stage, Lineage lineage) {
  ColumnBlock b;
  b.prefix = std::move(prefix);
  b.count = count;
  b.kind = kind;
  b.stage = stage;
  b.lineage = lineage;
  return b;
}

}  // namespace

CohortSpec wide_cohort_spec(uint64_t seed) {
  CohortSpec s;
  s.n_rows = 800;
  s.seed = seed;
  s.target_name = kWideCohortTarget;
  s.target_stage = Stage::delivery;
  s.target_lineage = Lineage::offspring;
  s.noise_sd = 110.0;
  s.clip_min = 800.0;
  s.n_factors = 10;

  using EK = EffectKind;
  s.signals = {
      signal("f0_m_plac_wt", 450, 90, 150, 900, {EK::saturating, 520, 450, 130, {}}, Stage::delivery),
      signal("f0_m_GA_Del", 38.6, 1.7, 28, 42, {EK::linear, 135, 38.6, 1, {}}, Stage::delivery),
      signal("f0_m_fundal_ht_v2", 32, 2.5, 22, 40, {EK::linear, 40, 32, 1, {}}, Stage::prenatal),
      signal("f0_m_hb_v2", 11, 1.2, 6, 15, {EK::nonmonotone, 55, 11, 1.2, {}}, Stage::prenatal),
      signal("f0_m_ht", 152, 5.5, 135, 175, {EK::threshold, 90, 152, 1, {}}, Stage::prenatal),
      signal("f0_m_wt_v1", 45, 6, 30, 80, {EK::interaction, 35, 45, 6, "f0_m_ht"}, Stage::prenatal),
      signal("f0_f_ht", 165, 6, 145, 190, {EK::linear, 3, 165, 1, {}}, Stage::prenatal,
             Lineage::paternal),
      signal("f0_m_age", 21, 3.5, 15, 40, {EK::linear, 5, 21, 1, {}}, Stage::prenatal),
  };
  // Centre the target near 2,800 g: the threshold adds a/2 and the
  // quadratic removes a on average.
  s.target_mean = 2800.0 - 90.0 / 2.0 + 55.0;

  // Retained columns: 296 continuous + 8 signals = 304 continuous features,
  // 507 ordinal + 40 numeric-coded nominal = 547 discrete features.
  constexpr std::size_t kRetainedMissing = 29786;
  constexpr std::size_t kTotalMissing = 2265802;
  constexpr std::size_t kSparseMissing = 7600;
  constexpr std::size_t kTextMissing = 1200;
  const std::size_t retained_counts[] = {296, 400, 107, 40};
  const std::size_t retained_cols = 843;
  std::vector<ColumnBlock> retained;
  {
    auto b = block("f0_m_v1_", 296, Kind::continuous, Stage::prenatal, Lineage::maternal);
    retained.push_back(b);
    retained.push_back(block("f0_m_cat_", 400, Kind::ordinal, Stage::prenatal, Lineage::maternal));
    retained.push_back(block("f1_del_", 107, Kind::ordinal, Stage::delivery, Lineage::offspring));
    retained.push_back(block("f0_f_code_", 40, Kind::nominal, Stage::prenatal, Lineage::paternal));
  }
  std::size_t given = 0;
  for (std::size_t i = 0; i < retained.size(); ++i) {
    ColumnBlock& b = retained[i];
    b.loading_min = 0.35;
    b.loading_max = 0.85;
    b.mechanism = Mechanism::mar;
    b.mar_driver = "f0_m_GA_Del";
    b.rate_min = 0.0;
    b.rate_max = 0.12;
    b.missing_cells = i + 1 == retained.size()
                          ? kRetainedMissing - given
                          : kRetainedMissing * retained_counts[i] / retained_cols;
    given += b.missing_cells;
  }

  std::vector<ColumnBlock> dropped;
  dropped.push_back(block("f1_post_c", 2000, Kind::continuous, Stage::postnatal, Lineage::offspring));
  dropped.push_back(block("f1_post_d", 1000, Kind::ordinal, Stage::postnatal, Lineage::offspring));
  dropped.push_back(block("f0_f_post_", 1000, Kind::continuous, Stage::postnatal, Lineage::paternal));
  dropped.push_back(block("hh_post_", 857, Kind::ordinal, Stage::postnatal, Lineage::other));
  dropped.push_back(block("f0_m_post_", 236, Kind::continuous, Stage::postnatal, Lineage::maternal));
  const std::size_t post_missing = kTotalMissing - kRetainedMissing - kSparseMissing - kTextMissing;
  const std::size_t post_cols = 2000 + 1000 + 1000 + 857 + 236;
  given = 0;
  for (std::size_t i = 0; i < dropped.size(); ++i) {
    ColumnBlock& b = dropped[i];
    b.loading_min = 0.0;
    b.loading_max = 0.6;
    b.rate_min = 0.3;
    b.rate_max = 1.0;
    b.record_truth = false;
    b.missing_cells = i + 1 == dropped.size() ? post_missing - given
                                              : post_missing * b.count / post_cols;
    given += b.missing_cells;
  }

  auto sparse = block("f0_m_sparse_", 19, Kind::continuous, Stage::prenatal, Lineage::maternal);
  sparse.loading_max = 0.5;
  sparse.rate_min = 0.4;
  sparse.rate_max = 0.75;
  sparse.missing_cells = kSparseMissing;
  sparse.record_truth = false;

  auto text = block("f0_m_txt_", 15, Kind::nominal, Stage::prenatal, Lineage::maternal);
  text.text_labels = true;
  text.rate_max = 0.25;
  text.missing_cells = kTextMissing;
  text.record_truth = false;

  // Postnatal family data first, then postnatal maternal data, the sparse
  // block, the text block and finally the retained columns.
  for (std::size_t i = 0; i + 1 < dropped.size(); ++i) s.blocks.push_back(dropped[i]);
  s.blocks.push_back(dropped.back());
  s.blocks.push_back(sparse);
  s.blocks.push_back(text);
  for (auto& b : retained) s.blocks.push_back(b);
  return s;
}

CohortSpec mar_spec(std::size_t n_rows, double rate, uint64_t seed) {
  CohortSpec s;
  s.n_rows = n_rows;
  s.seed = seed;
  s.target_name = "y";
  s.target_mean = 0.0;
  s.noise_sd = 1.0;
  s.n_factors = 2;
  s.signals = {signal("driver", 0, 1, -1e300, 1e300, {EffectKind::linear, 1.0, 0.0, 1.0, {}},
                      Stage::prenatal)};
  auto b = block("c", 10, Kind::continuous, Stage::prenatal, Lineage::maternal);
  b.loading_min = 0.8;
  b.loading_max = 0.95;
  b.mechanism = Mechanism::mar;
  b.mar_driver = "driver";
  b.missing_rate = rate;
  s.blocks.push_back(b);
  return s;
}

CohortSpec planted_spec(std::size_t n_rows, std::size_t n_signal, std::size_t n_decoys,
                        uint64_t seed) {
  CohortSpec s;
  s.n_rows = n_rows;
  s.seed = seed;
  s.target_name = "y";
  s.noise_sd = 1.0;
  s.n_factors = 1;
  using EK = EffectKind;
  for (std::size_t i = 0; i < n_signal; ++i) {
    Effect e;
    switch (i % 4) {
      case 0: e = {EK::linear, 1.2, 0.0, 1.0, {}}; break;
      case 1: e = {EK::saturating, 1.6, 0.0, 1.0, {}}; break;
      case 2: e = {EK::threshold, 2.2, 0.0, 1.0, {}}; break;
      default: e = {EK::nonmonotone, 0.9, 0.0, 1.0, {}}; break;
    }
    s.signals.push_back(signal("s" + std::to_string(i), 0.0, 1.0, -1e300, 1e300, e, Stage::prenatal));
  }
  const std::size_t discrete = n_decoys * 3 / 10;
  s.blocks.push_back(block("d", n_decoys - discrete, Kind::continuous, Stage::prenatal,
                           Lineage::maternal));
  if (discrete > 0) {
    s.blocks.push_back(block("k", discrete, Kind::ordinal, Stage::prenatal, Lineage::maternal));
  }
  return s;
}

// ---- JSON ----------------------------------------------------------------

nlohmann::json to_json(const CohortSpec& spec) {
  nlohmann::json signals = nlohmann::json::array();
  for (const auto& s : spec.signals) {
    nlohmann::json e{{"kind", to_string(s.effect.kind)}, {"a", s.effect.a}, {"b", s.effect.b},
                     {"c", s.effect.c}};
    if (!s.effect.partner.empty()) e["partner"] = s.effect.partner;
    signals.push_back({{"name", s.name}, {"mean", s.mean}, {"sd", s.sd}, {"lo", s.lo},
                       {"hi", s.hi}, {"effect", e}, {"stage", to_string(s.stage)},
                       {"lineage", to_string(s.lineage)}, {"missing_rate", s.missing_rate}});
  }
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : spec.blocks) {
    blocks.push_back({{"prefix", b.prefix}, {"count", b.count}, {"kind", to_string(b.kind)},
                      {"text_labels", b.text_labels}, {"stage", to_string(b.stage)},
                      {"lineage", to_string(b.lineage)}, {"loading_min", b.loading_min},
                      {"loading_max", b.loading_max},
                      {"mechanism", b.mechanism == Mechanism::mar ? "mar" : "mcar"},
                      {"mar_driver", b.mar_driver}, {"mar_strength", b.mar_strength},
                      {"missing_rate", b.missing_rate}, {"missing_cells", b.missing_cells},
                      {"rate_min", b.rate_min}, {"rate_max", b.rate_max},
                      {"record_truth", b.record_truth}});
  }
  return {{"n_rows", spec.n_rows},
          {"seed", spec.seed},
          {"target_name", spec.target_name},
          {"target_stage", to_string(spec.target_stage)},
          {"target_lineage", to_string(spec.target_lineage)},
          {"target_mean", spec.target_mean},
          {"noise_sd", spec.noise_sd},
          {"clip_min", spec.clip_min},
          {"n_factors", spec.n_factors},
          {"signals", std::move(signals)},
          {"blocks", std::move(blocks)}};
}

CohortSpec cohort_spec_from_json(const nlohmann::json& j) {
  try {
    CohortSpec s;
    s.n_rows = j.at("n_rows").get<std::size_t>();
    s.seed = j.value("seed", s.seed);
    s.target_name = j.value("target_name", s.target_name);
    s.target_stage = parse_stage(j.value("target_stage", std::string("delivery")));
    s.target_lineage = parse_lineage(j.value("target_lineage", std::string("offspring")));
    s.target_mean = j.value("target_mean", s.target_mean);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.clip_min = j.value("clip_min", s.clip_min);
    s.n_factors = j.value("n_factors", s.n_factors);
    for (const auto& js : j.value("signals", nlohmann::json::array())) {
      SignalFeature f;
      f.name = js.at("name").get<std::string>();
      f.mean = js.value("mean", 0.0);
      f.sd = js.value("sd", 1.0);
      f.lo = js.value("lo", -1e300);
      f.hi = js.value("hi", 1e300);
      const auto& je = js.at("effect");
      f.effect.kind = parse_effect_kind(je.at("kind").get<std::string>());
      f.effect.a = je.value("a", 1.0);
      f.effect.b = je.value("b", 0.0);
      f.effect.c = je.value("c", 1.0);
      f.effect.partner = je.value("partner", std::string{});
      f.stage = parse_stage(js.value("stage", std::string("prenatal")));
      f.lineage = parse_lineage(js.value("lineage", std::string("maternal")));
      f.missing_rate = js.value("missing_rate", 0.0);
      s.signals.push_back(std::move(f));
    }
    for (const auto& jb : j.value("blocks", nlohmann::json::array())) {
      ColumnBlock b;
      b.prefix = jb.at("prefix").get<std::string>();
      b.count = jb.at("count").get<std::size_t>();
      b.kind = parse_kind(jb.value("kind", std::string("continuous")));
      b.text_labels = jb.value("text_labels", false);
      b.stage = parse_stage(jb.value("stage", std::string("prenatal")));
      b.lineage = parse_lineage(jb.value("lineage", std::string("maternal")));
      b.loading_min = jb.value("loading_min", 0.0);
      b.loading_max = jb.value("loading_max", 0.0);
      const std::string mech = jb.value("mechanism", std::string("mcar"));
      if (mech != "mcar" && mech != "mar") throw ValidationError("unknown mechanism '" + mech + "'");
      b.mechanism = mech == "mar" ? Mechanism::mar : Mechanism::mcar;
      b.mar_driver = jb.value("mar_driver", std::string{});
      b.mar_strength = jb.value("mar_strength", b.mar_strength);
      b.missing_rate = jb.value("missing_rate", 0.0);
      b.missing_cells = jb.value("missing_cells", std::size_t{0});
      b.rate_min = jb.value("rate_min", 0.0);
      b.rate_max = jb.value("rate_max", 0.0);
      b.record_truth = jb.value("record_truth", true);
      s.blocks.push_back(std::move(b));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed cohort spec: ") + e.what());
  }
}

nlohmann::json to_json(const GroundTruth& truth) {
  nlohmann::json signals = nlohmann::json::array();
  for (const auto& s : truth.signals) {
    nlohmann::json e{{"kind", to_string(s.effect.kind)}, {"a", s.effect.a}, {"b", s.effect.b},
                     {"c", s.effect.c}};
    if (!s.effect.partner.empty()) e["partner"] = s.effect.partner;
    signals.push_back({{"name", s.name}, {"effect", std::move(e)}});
  }
  nlohmann::json blocks = nlohmann::json::object();
  for (const auto& [name, block] : truth.block_of) blocks[block].push_back(name);
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [block, names] : blocks.items()) counts[block] = names.size();
  return {{"signal_features", truth.signal_features},
          {"signals", std::move(signals)},
          {"noiseless_target", truth.noiseless_target},
          {"block_sizes", std::move(counts)}};
}

void write_masked_truth_csv(const Cohort& cohort, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << "column,row,value\n";
  for (const auto& col : cohort.table.columns()) {
    const auto it = cohort.truth.true_values.find(col.meta.name);
    if (it == cohort.truth.true_values.end()) continue;
    for (std::size_t r = 0; r < col.values.size(); ++r) {
      if (col.present(r)) continue;
      out << col.meta.name << ',' << r << ',' << format_double(it->second[r]) << '\n';
    }
  }
}

}  // namespace tabreg

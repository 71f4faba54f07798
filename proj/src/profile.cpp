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

#include "tabreg/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace tabreg {

namespace {

SummaryStats summarize_observed(const std::vector<double>& x) {
  if (x.empty()) throw ValidationError("summarize: no observed values");
  SummaryStats s;
  s.n_observed = x.size();
  const double n = static_cast<double>(x.size());
  s.mean = mean(x);
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  s.min = *lo;
  s.max = *hi;
  // Guard the mean against rounding outside [min, max].
  s.mean = std::clamp(s.mean, s.min, s.max);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.sd = x.size() > 1 ? std::sqrt(m2 * n / (n - 1.0)) : 0.0;
  s.zero_variance = s.min == s.max;
  if (s.zero_variance) return s;

  if (x.size() >= 3) {
    const double g1 = m3 / std::pow(m2, 1.5);
    s.skewness = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
  }
  if (x.size() >= 4) {
    const double g2 = m4 / (m2 * m2) - 3.0;
    s.excess_kurtosis = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
  }
  return s;
}

}  // namespace

SummaryStats summarize(std::span<const double> values, std::span<const CellState> state) {
  std::vector<double> x;
  x.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (state[i] != CellState::missing) x.push_back(values[i]);
  }
  return summarize_observed(x);
}

SummaryStats summarize(std::span<const double> values) {
  return summarize_observed(std::vector<double>(values.begin(), values.end()));
}

SummaryStats summarize(const Column& column) { return summarize(column.values, column.state); }

Normality classify_normality(const SummaryStats& stats, double skew_tol, double kurt_tol) {
  if (!stats.skewness || !stats.excess_kurtosis) return Normality::non_normal;
  return std::fabs(*stats.skewness) <= skew_tol && std::fabs(*stats.excess_kurtosis) <= kurt_tol
             ? Normality::normal
             : Normality::non_normal;
}

WeightClass who_bw_class(double weight_g) {
  if (!(weight_g > 0.0)) throw ValidationError("who_bw_class: weight must be positive");
  if (weight_g < 1500.0) return WeightClass::very_low;
  if (weight_g < 2500.0) return WeightClass::moderately_low;
  if (weight_g <= 4000.0) return WeightClass::normal;
  return WeightClass::high;
}

std::string_view to_string(WeightClass c) {
  switch (c) {
    case WeightClass::very_low: return "very_low";
    case WeightClass::moderately_low: return "moderately_low";
    case WeightClass::normal: return "normal";
    case WeightClass::high: return "high";
  }
  return "";
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw ValidationError("histogram: need at least one bin");
  if (values.empty()) throw ValidationError("histogram: empty sample");
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

void write_histogram_csv(const Histogram& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write '" + path.string() + "'");
  out << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ','
        << h.counts[i] << '\n';
  }
}

ProfileReport profile_table(const Table& table, double skew_tol, double kurt_tol) {
  ProfileReport report;
  report.dataset_missing_fraction = table.missing_fraction();
  for (const Column& c : table.columns()) {
    if (c.meta.role == Role::excluded) continue;
    ColumnProfile p;
    p.name = c.meta.name;
    p.kind = c.meta.kind;
    p.role = c.meta.role;
    p.missing_fraction = c.meta.missing_fraction;
    if (c.meta.role == Role::feature) ++report.n_features;
    const bool any = c.missing_count() < table.n_rows();
    if (c.meta.kind == Kind::continuous) {
      ++report.n_continuous;
      if (any) {
        p.stats = summarize(c);
        p.zero_variance = p.stats->zero_variance;
        p.normality = classify_normality(*p.stats, skew_tol, kurt_tol);
        if (*p.normality == Normality::normal) {
          ++report.n_normal;
        } else {
          ++report.n_non_normal;
        }
      }
    } else {
      ++report.n_discrete;
      std::map<long long, std::size_t> freq;
      for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (c.present(r)) ++freq[static_cast<long long>(c.values[r])];
      }
      p.frequencies.assign(freq.begin(), freq.end());
      p.zero_variance = freq.size() <= 1;
    }
    if (p.zero_variance) ++report.n_zero_variance;
    report.columns.push_back(std::move(p));
  }
  if (auto t = table.target_index()) {
    const Column& c = table.column(*t);
    report.target_weight_classes.assign(4, 0);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      if (c.present(r) && c.values[r] > 0.0) {
        ++report.target_weight_classes[static_cast<std::size_t>(who_bw_class(c.values[r]))];
      }
    }
  }
  return report;
}

nlohmann::json to_json(const SummaryStats& s) {
  nlohmann::json j{{"n_observed", s.n_observed}, {"mean", s.mean}, {"sd", s.sd},
                   {"min", s.min},               {"max", s.max},   {"zero_variance", s.zero_variance}};
  j["skewness"] = s.skewness ? nlohmann::json(*s.skewness) : nlohmann::json(nullptr);
  j["excess_kurtosis"] =
      s.excess_kurtosis ? nlohmann::json(*s.excess_kurtosis) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const ProfileReport& report) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& p : report.columns) {
    nlohmann::json c{{"name", p.name},
                     {"kind", to_string(p.kind)},
                     {"role", to_string(p.role)},
                     {"missing_fraction", p.missing_fraction},
                     {"zero_variance", p.zero_variance}};
    if (p.stats) c["stats"] = to_json(*p.stats);
    if (p.normality) c["normal"] = *p.normality == Normality::normal;
    if (!p.frequencies.empty()) {
      nlohmann::json f = nlohmann::json::array();
      for (auto [code, count] : p.frequencies) f.push_back({code, count});
      c["frequencies"] = std::move(f);
    }
    cols.push_back(std::move(c));
  }
  nlohmann::json j{{"n_features", report.n_features},
                   {"n_continuous", report.n_continuous},
                   {"n_discrete", report.n_discrete},
                   {"n_normal", report.n_normal},
                   {"n_non_normal", report.n_non_normal},
                   {"n_zero_variance", report.n_zero_variance},
                   {"dataset_missing_fraction", report.dataset_missing_fraction},
                   {"columns", std::move(cols)}};
  if (!report.target_weight_classes.empty()) {
    nlohmann::json w;
    for (std::size_t i = 0; i < 4; ++i) {
      w[std::string(to_string(static_cast<WeightClass>(i)))] = report.target_weight_classes[i];
    }
    j["target_weight_classes"] = std::move(w);
  }
  return j;
}

}  // namespace tabreg

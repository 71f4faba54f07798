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

#include "tabreg/table.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace tabreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names,
             std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw ValidationError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 3> kKindNames{"continuous", "ordinal", "nominal"};
constexpr std::array<std::string_view, 3> kStageNames{"prenatal", "delivery", "postnatal"};
constexpr std::array<std::string_view, 4> kLineageNames{"maternal", "paternal", "offspring",
                                                        "other"};
constexpr std::array<std::string_view, 3> kRoleNames{"feature", "target", "excluded"};

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// RFC-4180 record splitter over an in-memory buffer.
class CsvReader {
 public:
  explicit CsvReader(std::string text) : text_(std::move(text)) {}

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    std::string field;
    bool quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        field.push_back(c);
        ++pos_;
        continue;
      }
      if (c == '"') {
        quoted = true;
        ++pos_;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        ++pos_;
      } else if (c == '\r' || c == '\n') {
        if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
        break;
      } else {
        field.push_back(c);
        ++pos_;
      }
    }
    if (quoted) throw ValidationError("csv: unterminated quoted field");
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::string text_;
  std::size_t pos_ = 0;
};

std::string csv_escape(std::string_view s) {
  const bool needs = s.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!s.empty() && (s.front() == ' ' || s.back() == ' '));
  if (!needs) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool contains_stage(const std::vector<Stage>& v, Stage s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}
bool contains_lineage(const std::vector<Lineage>& v, Lineage s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}
bool contains_kind(const std::vector<Kind>& v, Kind s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

std::string_view to_string(Kind v) { return kKindNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Stage v) { return kStageNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Lineage v) { return kLineageNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Role v) { return kRoleNames[static_cast<std::size_t>(v)]; }
Kind parse_kind(std::string_view s) { return parse_enum<Kind>(s, kKindNames, "kind"); }
Stage parse_stage(std::string_view s) { return parse_enum<Stage>(s, kStageNames, "stage"); }
Lineage parse_lineage(std::string_view s) {
  return parse_enum<Lineage>(s, kLineageNames, "lineage");
}
Role parse_role(std::string_view s) { return parse_enum<Role>(s, kRoleNames, "role"); }

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(
      std::count(state.begin(), state.end(), CellState::missing));
}

Table::Table(std::size_t n_rows, std::vector<Column> columns)
    : n_rows_(n_rows), columns_(std::move(columns)) {
  std::unordered_set<std::string_view> seen;
  for (auto& col : columns_) {
    if (!seen.insert(col.meta.name).second) {
      throw ValidationError("duplicate column name '" + col.meta.name + "'");
    }
    if (col.values.size() != n_rows_ || col.state.size() != n_rows_) {
      throw ValidationError("column '" + col.meta.name + "' has wrong length");
    }
    for (std::size_t r = 0; r < n_rows_; ++r) {
      if (!col.present(r)) {
        col.values[r] = kNaN;
        continue;
      }
      const double v = col.values[r];
      if (!std::isfinite(v)) {
        throw ValidationError("column '" + col.meta.name + "' has a non-finite observed value");
      }
      if (is_discrete(col.meta.kind) && (v < 0.0 || v != std::floor(v))) {
        throw ValidationError("column '" + col.meta.name +
                              "' must hold non-negative integer codes");
      }
    }
    col.meta.missing_fraction =
        n_rows_ == 0 ? 0.0
                     : static_cast<double>(col.missing_count()) / static_cast<double>(n_rows_);
  }
}

std::optional<std::size_t> Table::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].meta.name == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ValidationError("no column named '" + std::string(name) + "'");
}

std::optional<std::size_t> Table::target_index() const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].meta.role == Role::target) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_target() const {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].meta.role != Role::target) continue;
    if (found) throw ValidationError("table has more than one target column");
    found = i;
  }
  if (!found) throw ValidationError("table has no target column");
  return *found;
}

std::vector<std::size_t> Table::feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].meta.role == Role::feature) out.push_back(i);
  }
  return out;
}

std::vector<std::string> Table::names(std::span<const std::size_t> indices) const {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(columns_.at(i).meta.name);
  return out;
}

std::size_t Table::missing_cells() const {
  std::size_t n = 0;
  for (const auto& c : columns_) n += c.missing_count();
  return n;
}

double Table::missing_fraction() const {
  const double total = static_cast<double>(n_rows_) * static_cast<double>(columns_.size());
  return total == 0.0 ? 0.0 : static_cast<double>(missing_cells()) / total;
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column nc;
    nc.meta = c.meta;
    nc.values.reserve(rows.size());
    nc.state.reserve(rows.size());
    for (auto r : rows) {
      nc.values.push_back(c.values.at(r));
      nc.state.push_back(c.state.at(r));
    }
    out.push_back(std::move(nc));
  }
  return Table(rows.size(), std::move(out));
}

Table Table::select_columns(std::span<const std::size_t> cols) const {
  std::vector<Column> out;
  out.reserve(cols.size());
  for (auto i : cols) out.push_back(columns_.at(i));
  return Table(n_rows_, std::move(out));
}

Table Table::replace_column(std::size_t index, Column column) const {
  std::vector<Column> out = columns_;
  out.at(index) = std::move(column);
  return Table(n_rows_, std::move(out));
}

// ---- CSV ---------------------------------------------------------------

Table parse_csv(std::istream& in, const CsvSchema& schema) {
  std::ostringstream buf;
  buf << in.rdbuf();
  CsvReader reader(buf.str());

  std::vector<std::string> header;
  if (!reader.next(header)) throw ValidationError("csv: missing header row");
  if (!header.empty() && header.front().starts_with("\xEF\xBB\xBF")) {
    header.front().erase(0, 3);
  }

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!position.emplace(header[i], i).second) {
      throw ValidationError("csv: duplicate column name '" + header[i] + "'");
    }
  }
  std::unordered_set<std::string> schema_names;
  for (const auto& meta : schema.columns) {
    if (!schema_names.insert(meta.name).second) {
      throw ValidationError("schema: duplicate column name '" + meta.name + "'");
    }
    if (!position.contains(meta.name)) {
      throw ValidationError("csv header does not contain schema column '" + meta.name + "'");
    }
  }
  for (const auto& h : header) {
    if (!schema_names.contains(h)) {
      throw ValidationError("csv column '" + h + "' is not in the schema");
    }
  }

  const std::unordered_set<std::string> missing(schema.missing_tokens.begin(),
                                                schema.missing_tokens.end());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields.front().empty()) continue;
    if (fields.size() != header.size()) {
      throw ValidationError("csv: row " + std::to_string(rows.size() + 2) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    }
    rows.push_back(fields);
  }

  const std::size_t n = rows.size();
  std::vector<Column> columns;
  columns.reserve(schema.columns.size());
  for (const auto& meta : schema.columns) {
    const std::size_t pos = position.at(meta.name);
    Column col;
    col.meta = meta;
    col.values.assign(n, kNaN);
    col.state.assign(n, CellState::missing);
    std::unordered_map<std::string, std::size_t> codes;
    if (meta.kind == Kind::nominal) {
      for (std::size_t i = 0; i < meta.labels.size(); ++i) codes.emplace(meta.labels[i], i);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& raw = rows[r][pos];
      const std::string_view cell = trim(raw);
      if (missing.contains(raw) || missing.contains(std::string(cell))) continue;
      double v = 0.0;
      switch (meta.kind) {
        case Kind::continuous:
          if (!parse_number(cell, v)) continue;
          break;
        case Kind::ordinal:
          if (!parse_number(cell, v) || v < 0.0 || v != std::floor(v)) {
            throw ValidationError("csv: ordinal column '" + meta.name + "' has value '" +
                                  std::string(cell) + "'");
          }
          break;
        case Kind::nominal: {
          auto [it, inserted] = codes.emplace(std::string(cell), codes.size());
          if (inserted) {
            col.meta.labels.emplace_back(cell);
            if (codes.size() > schema.max_cardinality) {
              throw ValidationError("csv: nominal column '" + meta.name +
                                    "' exceeds max cardinality " +
                                    std::to_string(schema.max_cardinality));
            }
          }
          v = static_cast<double>(it->second);
          break;
        }
      }
      col.values[r] = v;
      col.state[r] = CellState::observed;
    }
    if (meta.kind == Kind::nominal) {
      double unused = 0.0;
      col.meta.numeric_labels = std::all_of(
          col.meta.labels.begin(), col.meta.labels.end(),
          [&](const std::string& l) { return parse_number(l, unused); });
    } else {
      col.meta.numeric_labels = true;
    }
    columns.push_back(std::move(col));
  }
  return Table(n, std::move(columns));
}

Table load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open csv '" + path.string() + "'");
  return parse_csv(in, schema);
}

void write_csv(const Table& table, std::ostream& out) {
  const auto& cols = table.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j) out << ',';
    out << csv_escape(cols[j].meta.name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) out << ',';
      const Column& c = cols[j];
      if (!c.present(r)) continue;
      const double v = c.values[r];
      if (c.meta.kind == Kind::nominal && v < static_cast<double>(c.meta.labels.size())) {
        out << csv_escape(c.meta.labels[static_cast<std::size_t>(v)]);
      } else {
        out << format_double(v);
      }
    }
    out << '\n';
  }
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write csv '" + path.string() + "'");
  write_csv(table, out);
}

void write_provenance_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write csv '" + path.string() + "'");
  const auto& cols = table.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j) out << ',';
    out << csv_escape(cols[j].meta.name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) out << ',';
      switch (cols[j].state[r]) {
        case CellState::missing: out << "missing"; break;
        case CellState::observed: out << "observed"; break;
        case CellState::imputed: out << "imputed"; break;
      }
    }
    out << '\n';
  }
}

nlohmann::json schema_to_json(const CsvSchema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& m : schema.columns) {
    nlohmann::json c{{"name", m.name},
                     {"kind", to_string(m.kind)},
                     {"stage", to_string(m.stage)},
                     {"lineage", to_string(m.lineage)},
                     {"role", to_string(m.role)}};
    if (m.kind == Kind::nominal && !m.labels.empty()) c["labels"] = m.labels;
    cols.push_back(std::move(c));
  }
  return {{"columns", std::move(cols)},
          {"missing_tokens", schema.missing_tokens},
          {"max_cardinality", schema.max_cardinality}};
}

CsvSchema schema_from_json(const nlohmann::json& j) {
  CsvSchema s;
  try {
    for (const auto& c : j.at("columns")) {
      ColumnMeta m;
      m.name = c.at("name").get<std::string>();
      m.kind = parse_kind(c.at("kind").get<std::string>());
      m.stage = parse_stage(c.value("stage", std::string("prenatal")));
      m.lineage = parse_lineage(c.value("lineage", std::string("other")));
      m.role = parse_role(c.value("role", std::string("feature")));
      if (c.contains("labels")) m.labels = c.at("labels").get<std::vector<std::string>>();
      s.columns.push_back(std::move(m));
    }
    if (j.contains("missing_tokens")) {
      s.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();
    }
    s.max_cardinality = j.value("max_cardinality", s.max_cardinality);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("schema: ") + e.what());
  }
  if (s.missing_tokens.empty()) throw ValidationError("schema: missing_tokens must be non-empty");
  return s;
}

CsvSchema schema_of(const Table& table) {
  CsvSchema s;
  for (const auto& c : table.columns()) s.columns.push_back(c.meta);
  return s;
}

CsvSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open schema '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("schema '" + path.string() + "': " + e.what());
  }
  return schema_from_json(j);
}

// ---- Filtering ---------------------------------------------------------

void FilterPlan::validate() const {
  for (const auto& s : steps) {
    if (s.op == FilterStep::Op::min_observed && !(s.threshold >= 0.0 && s.threshold <= 1.0)) {
      throw ValidationError("filter plan: min_observed threshold must be in [0, 1]");
    }
  }
}

std::pair<Table, FilterTrace> apply_filter_plan(const Table& table, const FilterPlan& plan) {
  plan.validate();
  FilterTrace trace;
  std::vector<std::size_t> keep(table.n_cols());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;

  auto record = [&](std::string label) {
    std::size_t missing = 0;
    for (auto i : keep) missing += table.column(i).missing_count();
    const double cells = static_cast<double>(keep.size()) * static_cast<double>(table.n_rows());
    trace.column_counts.push_back(keep.size());
    trace.missing_fractions.push_back(cells == 0.0 ? 0.0 : static_cast<double>(missing) / cells);
    trace.labels.push_back(std::move(label));
  };
  record("input");

  const double n = static_cast<double>(table.n_rows());
  for (const auto& step : plan.steps) {
    std::vector<std::size_t> next;
    for (auto i : keep) {
      const ColumnMeta& m = table.column(i).meta;
      bool drop = false;
      switch (step.op) {
        case FilterStep::Op::drop_stage:
          drop = contains_stage(step.stages, m.stage) &&
                 (step.lineages.empty() || contains_lineage(step.lineages, m.lineage));
          break;
        case FilterStep::Op::min_observed: {
          const double observed = n - static_cast<double>(table.column(i).missing_count());
          drop = observed < step.threshold * n - 1e-9;
          break;
        }
        case FilterStep::Op::keep_kinds:
          drop = !contains_kind(step.kinds, m.kind) ||
                 (step.numeric_only && m.kind == Kind::nominal && !m.numeric_labels);
          break;
        case FilterStep::Op::drop_lineage:
          drop = contains_lineage(step.lineages, m.lineage);
          break;
      }
      if (drop && m.role == Role::target) {
        throw ValidationError("filter plan would remove target column '" + m.name + "'");
      }
      if (!drop) next.push_back(i);
    }
    keep = std::move(next);
    record(step.label);
  }

  Table out = table.select_columns(keep);
  if (out.feature_indices().empty()) {
    throw ValidationError("filter plan leaves no feature columns");
  }
  return {std::move(out), std::move(trace)};
}

FilterPlan default_filter_plan() {
  FilterPlan plan;
  FilterStep after_birth;
  after_birth.op = FilterStep::Op::drop_stage;
  after_birth.stages = {Stage::postnatal};
  after_birth.lineages = {Lineage::offspring, Lineage::paternal, Lineage::other};
  after_birth.label = "drop postnatal child and family data";
  plan.steps.push_back(after_birth);

  FilterStep maternal_post;
  maternal_post.op = FilterStep::Op::drop_stage;
  maternal_post.stages = {Stage::postnatal};
  maternal_post.lineages = {Lineage::maternal};
  maternal_post.label = "drop postnatal maternal data";
  plan.steps.push_back(maternal_post);

  FilterStep observed;
  observed.op = FilterStep::Op::min_observed;
  observed.threshold = 0.6;
  observed.label = "keep columns at least 60% observed";
  plan.steps.push_back(observed);

  FilterStep numeric;
  numeric.op = FilterStep::Op::keep_kinds;
  numeric.kinds = {Kind::continuous, Kind::ordinal, Kind::nominal};
  numeric.numeric_only = true;
  numeric.label = "keep numeric columns";
  plan.steps.push_back(numeric);
  return plan;
}

namespace {

constexpr std::array<std::string_view, 4> kOpNames{"drop_stage", "min_observed", "keep_kinds",
                                                   "drop_lineage"};

template <typename E>
nlohmann::json enum_list(const std::vector<E>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (auto e : v) out.push_back(to_string(e));
  return out;
}

}  // namespace

nlohmann::json to_json(const FilterPlan& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : plan.steps) {
    nlohmann::json j{{"op", kOpNames[static_cast<std::size_t>(s.op)]}};
    switch (s.op) {
      case FilterStep::Op::drop_stage:
        j["stages"] = enum_list(s.stages);
        if (!s.lineages.empty()) j["lineages"] = enum_list(s.lineages);
        break;
      case FilterStep::Op::min_observed:
        j["threshold"] = s.threshold;
        break;
      case FilterStep::Op::keep_kinds:
        j["kinds"] = enum_list(s.kinds);
        j["numeric_only"] = s.numeric_only;
        break;
      case FilterStep::Op::drop_lineage:
        j["lineages"] = enum_list(s.lineages);
        break;
    }
    if (!s.label.empty()) j["label"] = s.label;
    steps.push_back(std::move(j));
  }
  return {{"steps", std::move(steps)}};
}

FilterPlan filter_plan_from_json(const nlohmann::json& j) {
  FilterPlan plan;
  try {
    for (const auto& s : j.at("steps")) {
      FilterStep step;
      step.op = parse_enum<FilterStep::Op>(s.at("op").get<std::string>(), kOpNames,
                                           "filter op");
      for (const auto& v : s.value("stages", nlohmann::json::array())) {
        step.stages.push_back(parse_stage(v.get<std::string>()));
      }
      for (const auto& v : s.value("lineages", nlohmann::json::array())) {
        step.lineages.push_back(parse_lineage(v.get<std::string>()));
      }
      for (const auto& v : s.value("kinds", nlohmann::json::array())) {
        step.kinds.push_back(parse_kind(v.get<std::string>()));
      }
      step.threshold = s.value("threshold", 0.0);
      step.numeric_only = s.value("numeric_only", false);
      step.label = s.value("label", std::string());
      plan.steps.push_back(std::move(step));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("filter plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

nlohmann::json to_json(const FilterTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < trace.column_counts.size(); ++i) {
    steps.push_back({{"label", trace.labels[i]},
                     {"columns", trace.column_counts[i]},
                     {"missing_fraction", trace.missing_fractions[i]}});
  }
  return {{"column_counts", trace.column_counts}, {"steps", std::move(steps)}};
}

MissingnessSummary recompute_missingness(const Table& table) {
  // The Table constructor already refreshes per-column fractions.
  std::vector<Column> cols = table.columns();
  Table fresh(table.n_rows(), std::move(cols));
  const double frac = fresh.missing_fraction();
  return {std::move(fresh), frac};
}

// ---- Splitting ---------------------------------------------------------

SplitIndices split_indices(std::size_t n_rows, double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("split: test fraction must be in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_rows) * test_fraction));
  if (n_rows < 2 || n_test == 0 || n_test >= n_rows) {
    throw ValidationError("split: fraction " + format_double(test_fraction) + " of " +
                          std::to_string(n_rows) + " rows leaves an empty partition");
  }
  Rng rng(seed);
  const auto order = permutation(n_rows, rng);
  SplitIndices out;
  out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

std::pair<Table, Table> split(const Table& table, double test_fraction, uint64_t seed) {
  const auto idx = split_indices(table.n_rows(), test_fraction, seed);
  return {table.select_rows(idx.train), table.select_rows(idx.test)};
}

// ---- Dense views -------------------------------------------------------

Dataset to_dataset(const Table& table, std::string_view target,
                   std::span<const std::string> features) {
  const std::size_t t = table.index_of(target);
  Dataset d;
  d.x = Matrix(table.n_rows(), features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    const Column& c = table.column(features[j]);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      if (!c.present(r)) {
        throw ValidationError("feature '" + c.meta.name + "' has missing cells");
      }
      d.x(r, j) = c.values[r];
    }
    d.feature_names.push_back(c.meta.name);
    d.feature_kinds.push_back(c.meta.kind);
  }
  const Column& tc = table.column(t);
  d.y.resize(table.n_rows());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (!tc.present(r)) throw ValidationError("target '" + tc.meta.name + "' has missing cells");
    d.y[r] = tc.values[r];
  }
  return d;
}

Dataset to_dataset(const Table& table, std::string_view target) {
  std::vector<std::string> features;
  for (auto i : table.feature_indices()) {
    if (table.column(i).meta.name != target) features.push_back(table.column(i).meta.name);
  }
  return to_dataset(table, target, features);
}

}  // namespace tabreg

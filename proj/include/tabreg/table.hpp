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
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tabreg/common.hpp"

namespace tabreg {

enum class Kind { continuous, ordinal, nominal };
enum class Stage { prenatal, delivery, postnatal };
enum class Lineage { maternal, paternal, offspring, other };
enum class Role { feature, target, excluded };

// Per-cell provenance. Anything other than "missing" counts as observed for
// modeling; "imputed" remembers that the value was filled in.
enum class CellState : std::uint8_t { missing = 0, observed = 1, imputed = 2 };

std::string_view to_string(Kind v);
std::string_view to_string(Stage v);
std::string_view to_string(Lineage v);
std::string_view to_string(Role v);
Kind parse_kind(std::string_view s);
Stage parse_stage(std::string_view s);
Lineage parse_lineage(std::string_view s);
Role parse_role(std::string_view s);

inline bool is_discrete(Kind k) { return k != Kind::continuous; }

struct ColumnMeta {
  std::string name;
  Kind kind = Kind::continuous;
  Stage stage = Stage::prenatal;
  Lineage lineage = Lineage::other;
  Role role = Role::feature;
  // Recomputed from the cell states whenever a Table is constructed.
  double missing_fraction = 0.0;
  // Nominal columns: original label of each category code.
  std::vector<std::string> labels;
  // False for nominal columns whose labels are not all numbers.
  bool numeric_labels = true;
};

struct Column {
  ColumnMeta meta;
  std::vector<double> values;  // NaN in missing cells
  std::vector<CellState> state;

  bool present(std::size_t row) const { return state[row] != CellState::missing; }
  std::size_t missing_count() const;
};

// Immutable column store. The constructor enforces the shape, naming and
// value-domain invariants and refreshes every column's missing_fraction.
class Table {
 public:
  Table() = default;
  Table(std::size_t n_rows, std::vector<Column> columns);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(std::string_view name) const { return columns_[index_of(name)]; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws ValidationError

  std::optional<std::size_t> target_index() const;
  // Throws unless exactly one column has role == target.
  std::size_t require_target() const;
  std::vector<std::size_t> feature_indices() const;
  std::vector<std::string> names(std::span<const std::size_t> indices) const;

  std::size_t missing_cells() const;
  double missing_fraction() const;

  Table select_rows(std::span<const std::size_t> rows) const;
  Table select_columns(std::span<const std::size_t> cols) const;
  Table replace_column(std::size_t index, Column column) const;

 private:
  std::size_t n_rows_ = 0;
  std::vector<Column> columns_;
};

// ---- CSV ---------------------------------------------------------------

struct CsvSchema {
  std::vector<ColumnMeta> columns;
  std::vector<std::string> missing_tokens{"", "NA"};
  std::size_t max_cardinality = 1000;
};

Table load_csv(const std::filesystem::path& path, const CsvSchema& schema);
Table parse_csv(std::istream& in, const CsvSchema& schema);
void write_csv(const Table& table, std::ostream& out);
void write_csv(const Table& table, const std::filesystem::path& path);
// One cell per value: "observed", "imputed" or "missing".
void write_provenance_csv(const Table& table, const std::filesystem::path& path);

nlohmann::json schema_to_json(const CsvSchema& schema);
CsvSchema schema_from_json(const nlohmann::json& j);
// Schema describing an existing table, carrying its label dictionaries.
CsvSchema schema_of(const Table& table);
CsvSchema load_schema(const std::filesystem::path& path);

// ---- Filtering ---------------------------------------------------------

struct FilterStep {
  enum class Op { drop_stage, min_observed, keep_kinds, drop_lineage };
  Op op = Op::min_observed;
  std::vector<Stage> stages;
  // drop_stage: restricts the drop to these lineages (empty = any lineage).
  // drop_lineage: the lineages to drop.
  std::vector<Lineage> lineages;
  double threshold = 0.0;
  std::vector<Kind> kinds;
  // keep_kinds: additionally drop nominal columns with non-numeric labels.
  bool numeric_only = false;
  std::string label;
};

struct FilterPlan {
  std::vector<FilterStep> steps;
  void validate() const;
};

struct FilterTrace {
  // Entry 0 is the input; entry i + 1 follows step i.
  std::vector<std::size_t> column_counts;
  std::vector<double> missing_fractions;
  std::vector<std::string> labels;
};

std::pair<Table, FilterTrace> apply_filter_plan(const Table& table, const FilterPlan& plan);

// Postnatal child/paternal data, then postnatal maternal data, then the
// 60 % observed floor, then numeric-only columns.
FilterPlan default_filter_plan();

nlohmann::json to_json(const FilterPlan& plan);
FilterPlan filter_plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FilterTrace& trace);

struct MissingnessSummary {
  Table table;
  double dataset_fraction = 0.0;  // unobserved cells / total cells
};
MissingnessSummary recompute_missingness(const Table& table);

// ---- Splitting ---------------------------------------------------------

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Test size is round(n_rows * test_fraction); both sides must be non-empty.
SplitIndices split_indices(std::size_t n_rows, double test_fraction, uint64_t seed);
std::pair<Table, Table> split(const Table& table, double test_fraction, uint64_t seed);

inline constexpr double kDefaultTestFraction = 0.2;
inline constexpr uint64_t kDefaultSplitSeed = 20250101;

// ---- Dense views -------------------------------------------------------

struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> feature_names;
  std::vector<Kind> feature_kinds;
};

// Features (role == feature, or the listed names) and the target as dense
// arrays. Every used cell must be present.
Dataset to_dataset(const Table& table, std::string_view target);
Dataset to_dataset(const Table& table, std::string_view target,
                   std::span<const std::string> features);

}  // namespace tabreg

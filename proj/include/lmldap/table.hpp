// Copyright 2026 The LML-DAP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LMLDAP_TABLE_HPP_
#define LMLDAP_TABLE_HPP_

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lmldap {

enum class ColumnKind { kNumeric, kCategorical };

std::string_view to_string(ColumnKind kind);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kCategorical;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

class Schema {
 public:
  Schema() = default;
  // Throws TableError if names repeat or the label is not among them. The
  // label column is forced to Categorical.
  Schema(std::vector<ColumnSpec> columns, std::string label_column);

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const std::string& label_column() const { return label_column_; }
  std::size_t label_index() const { return label_index_; }
  std::size_t size() const { return columns_.size(); }
  const ColumnSpec& column(std::size_t i) const { return columns_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const;

  // All columns except the label, in schema order.
  std::vector<std::size_t> feature_indices() const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<ColumnSpec> columns_;
  std::string label_column_;
  std::size_t label_index_ = 0;
};

// Half-open row interval [begin, end).
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

class TableError : public std::runtime_error {
 public:
  enum class Kind {
    kEmptyInput,
    kMissingLabelColumn,
    kRaggedRow,
    kEmptyLabel,
    kDuplicateColumn,
    kOutOfRange,
    kUnterminatedQuote,
  };

  TableError(Kind kind, std::string message, std::size_t line = 0)
      : std::runtime_error(std::move(message)), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  // 1-based physical line number where applicable, 0 otherwise.
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

// Strict decimal: optional sign, digits with optional fraction, optional
// exponent. Surrounding ASCII whitespace is ignored. No inf/nan, no hex.
std::optional<double> parse_decimal(std::string_view text);

// Shortest text that parses back to the same double; integral values keep a
// trailing ".0" so they still read as decimals.
std::string format_decimal(double value);

// One row's cells in schema order. `numbers` holds the parsed value for
// Numeric columns and NaN for missing or Categorical cells.
struct Row {
  std::vector<std::string> cells;
  std::vector<double> numbers;
};

// Immutable columnar table.
class Table {
 public:
  Table() = default;
  // Infers column kinds from `rows`. Every row must have schema width and a
  // non-empty label.
  static Table from_rows(std::vector<std::string> names,
                         std::string label_column,
                         std::vector<std::vector<std::string>> rows);

  const Schema& schema() const { return schema_; }
  std::size_t row_count() const { return row_count_; }
  std::size_t column_count() const { return schema_.size(); }

  const std::string& cell(std::size_t row, std::size_t col) const {
    return text_[col][row];
  }
  // NaN when missing or when the column is Categorical.
  double number(std::size_t row, std::size_t col) const {
    return numbers_[col][row];
  }
  bool missing(std::size_t row, std::size_t col) const {
    return text_[col][row].empty();
  }
  const std::string& label(std::size_t row) const {
    return text_[schema_.label_index()][row];
  }

  const std::vector<std::string>& column_text(std::size_t col) const {
    return text_[col];
  }
  const std::vector<double>& column_numbers(std::size_t col) const {
    return numbers_[col];
  }

  Row row(std::size_t index) const;

  // Copy of a row subset (used for per-chunk processing).
  Table slice(RowRange range) const;

  friend bool operator==(const Table& a, const Table& b) {
    return a.schema_ == b.schema_ && a.text_ == b.text_;
  }

 private:
  Schema schema_;
  std::size_t row_count_ = 0;
  std::vector<std::vector<std::string>> text_;
  std::vector<std::vector<double>> numbers_;
};

struct CsvOptions {
  // Skip blanks after a delimiter so `a, "b, c"` reads as two fields.
  bool skip_initial_space = false;
};

// RFC-4180-style record splitter. Completely empty physical lines are skipped.
// Each record is returned with the 1-based line on which it starts.
std::vector<std::pair<std::size_t, std::vector<std::string>>> parse_csv_records(
    std::string_view text, CsvOptions options = {});

Table load_csv(std::istream& source, std::string_view label_column);
Table load_csv_text(std::string_view text, std::string_view label_column);
Table load_csv_file(const std::string& path, std::string_view label_column);

// Ordered by first appearance.
std::vector<std::pair<std::string, std::size_t>> class_counts(
    const Table& table);

std::string csv_escape(std::string_view cell);

// Header line plus the selected rows, each terminated by '\n'.
std::string to_csv_text(const Table& table, RowRange rows);
std::string to_csv_text(const Table& table);
// Arbitrary row subset, optionally restricted to given columns.
std::string to_csv_text(const Table& table,
                        const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& columns);

}  // namespace lmldap

#endif  // LMLDAP_TABLE_HPP_

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

#include "lmldap/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace lmldap {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::kNumeric ? "Numeric" : "Categorical";
}

Schema::Schema(std::vector<ColumnSpec> columns, std::string label_column)
    : columns_(std::move(columns)), label_column_(std::move(label_column)) {
  std::set<std::string_view> seen;
  for (const auto& c : columns_) {
    if (!seen.insert(c.name).second) {
      throw TableError(TableError::Kind::kDuplicateColumn,
                       "duplicate column name '" + c.name + "'");
    }
  }
  auto idx = find(label_column_);
  if (!idx) {
    throw TableError(TableError::Kind::kMissingLabelColumn,
                     "label column '" + label_column_ + "' not in header");
  }
  label_index_ = *idx;
  columns_[label_index_].kind = ColumnKind::kCategorical;
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> Schema::feature_indices() const {
  std::vector<std::size_t> out;
  out.reserve(columns_.size());
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i != label_index_) out.push_back(i);
  }
  return out;
}

std::optional<double> parse_decimal(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) return std::nullopt;
  // Validate the grammar by hand: from_chars also accepts inf/nan/hex forms.
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  std::size_t int_digits = 0, frac_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++int_digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++frac_digits;
  }
  if (int_digits + frac_digits == 0) return std::nullopt;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return std::nullopt;
  }
  if (i != s.size()) return std::nullopt;

  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec == std::errc::result_out_of_range) {
    return std::nullopt;
  }
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string format_decimal(double value) {
  if (value == 0.0) value = 0.0;  // drop negative zero
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, ptr);
  if (std::isfinite(value) &&
      out.find_first_of(".e") == std::string::npos) {
    out += ".0";
  }
  return out;
}

Table Table::from_rows(std::vector<std::string> names, std::string label_column,
                       std::vector<std::vector<std::string>> rows) {
  std::vector<ColumnSpec> specs;
  specs.reserve(names.size());
  for (auto& n : names) specs.push_back({std::move(n), ColumnKind::kCategorical});
  // Label resolution first so the error is reported before row checks.
  Schema probe(specs, label_column);

  const std::size_t width = specs.size();
  Table t;
  t.row_count_ = rows.size();
  t.text_.assign(width, {});
  for (auto& col : t.text_) col.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw TableError(TableError::Kind::kRaggedRow,
                       "row " + std::to_string(r) + " has " +
                           std::to_string(rows[r].size()) + " cells, expected " +
                           std::to_string(width));
    }
    if (rows[r][probe.label_index()].empty()) {
      throw TableError(TableError::Kind::kEmptyLabel,
                       "row " + std::to_string(r) + " has an empty label");
    }
    for (std::size_t c = 0; c < width; ++c) {
      t.text_[c].push_back(std::move(rows[r][c]));
    }
  }

  t.numbers_.assign(width, std::vector<double>(rows.size(), kNaN));
  for (std::size_t c = 0; c < width; ++c) {
    if (c == probe.label_index()) continue;
    bool numeric = true;
    bool any = false;
    for (std::size_t r = 0; r < t.row_count_ && numeric; ++r) {
      const auto& cell = t.text_[c][r];
      if (cell.empty()) continue;
      auto v = parse_decimal(cell);
      if (!v) {
        numeric = false;
      } else {
        any = true;
        t.numbers_[c][r] = *v;
      }
    }
    if (numeric && any) {
      specs[c].kind = ColumnKind::kNumeric;
    } else {
      std::fill(t.numbers_[c].begin(), t.numbers_[c].end(), kNaN);
    }
  }
  t.schema_ = Schema(std::move(specs), std::move(label_column));
  return t;
}

Row Table::row(std::size_t index) const {
  if (index >= row_count_) {
    throw TableError(TableError::Kind::kOutOfRange,
                     "row index " + std::to_string(index) + " out of range");
  }
  Row r;
  r.cells.reserve(column_count());
  r.numbers.reserve(column_count());
  for (std::size_t c = 0; c < column_count(); ++c) {
    r.cells.push_back(text_[c][index]);
    r.numbers.push_back(numbers_[c][index]);
  }
  return r;
}

Table Table::slice(RowRange range) const {
  if (range.begin > range.end || range.end > row_count_) {
    throw TableError(TableError::Kind::kOutOfRange, "slice out of range");
  }
  Table t;
  t.schema_ = schema_;
  t.row_count_ = range.size();
  t.text_.resize(text_.size());
  t.numbers_.resize(numbers_.size());
  for (std::size_t c = 0; c < text_.size(); ++c) {
    t.text_[c].assign(text_[c].begin() + range.begin, text_[c].begin() + range.end);
    t.numbers_[c].assign(numbers_[c].begin() + range.begin,
                         numbers_[c].begin() + range.end);
  }
  return t;
}

std::vector<std::pair<std::size_t, std::vector<std::string>>> parse_csv_records(
    std::string_view text, CsvOptions options) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool at_field_start = true;
  bool record_has_content = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_quoted = false;
    at_field_start = true;
  };
  auto end_record = [&] {
    end_field();
    if (record_has_content) {
      records.emplace_back(record_line, std::move(fields));
    }
    fields.clear();
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case ',':
        record_has_content = true;
        end_field();
        break;
      case '\r':
        // Bare CR inside a record is kept only if not part of CRLF.
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field += c;
        record_has_content = true;
        at_field_start = false;
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      case '"':
        record_has_content = true;
        if (at_field_start && !field_quoted) {
          in_quotes = true;
          field_quoted = true;
          quote_line = line;
          at_field_start = false;
        } else {
          field += c;
        }
        break;
      case ' ':
      case '\t':
        record_has_content = true;
        if (options.skip_initial_space && at_field_start) break;
        field += c;
        at_field_start = false;
        break;
      default:
        record_has_content = true;
        field += c;
        at_field_start = false;
        break;
    }
  }
  if (in_quotes) {
    throw TableError(TableError::Kind::kUnterminatedQuote,
                     "unterminated quoted field starting on line " +
                         std::to_string(quote_line),
                     quote_line);
  }
  if (record_has_content || !fields.empty()) end_record();
  return records;
}

Table load_csv_text(std::string_view text, std::string_view label_column) {
  auto records = parse_csv_records(text);
  if (records.empty()) {
    throw TableError(TableError::Kind::kEmptyInput, "input has no header line");
  }
  auto header = std::move(records.front().second);
  const std::size_t width = header.size();
  if (std::find(header.begin(), header.end(), label_column) == header.end()) {
    throw TableError(TableError::Kind::kMissingLabelColumn,
                     "label column '" + std::string(label_column) +
                         "' not in header",
                     records.front().first);
  }
  const auto label_idx = static_cast<std::size_t>(
      std::find(header.begin(), header.end(), label_column) - header.begin());

  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t i = 1; i < records.size(); ++i) {
    auto& [line_no, fields] = records[i];
    if (fields.size() != width) {
      throw TableError(TableError::Kind::kRaggedRow,
                       "line " + std::to_string(line_no) + ": expected " +
                           std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    if (fields[label_idx].empty()) {
      throw TableError(TableError::Kind::kEmptyLabel,
                       "line " + std::to_string(line_no) + ": empty label",
                       line_no);
    }
    rows.push_back(std::move(fields));
  }
  return Table::from_rows(std::move(header), std::string(label_column),
                          std::move(rows));
}

Table load_csv(std::istream& source, std::string_view label_column) {
  std::string text{std::istreambuf_iterator<char>(source),
                   std::istreambuf_iterator<char>()};
  return load_csv_text(text, label_column);
}

Table load_csv_file(const std::string& path, std::string_view label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::ios_base::failure("cannot open '" + path + "'");
  }
  return load_csv(in, label_column);
}

std::vector<std::pair<std::string, std::size_t>> class_counts(
    const Table& table) {
  std::vector<std::pair<std::string, std::size_t>> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const auto& label = table.label(r);
    auto [it, inserted] = slot.try_emplace(label, out.size());
    if (inserted) out.emplace_back(label, 0);
    ++out[it->second].second;
  }
  return out;
}

std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(cell);
  }
  std::string out;
  out.reserve(cell.size() + 2);
  out += '"';
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

void append_line(std::string& out, const Table& table, std::size_t row,
                 const std::vector<std::size_t>& columns) {
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (k) out += ',';
    out += csv_escape(table.cell(row, columns[k]));
  }
  // A lone empty cell would render as a blank line, which the reader skips.
  if (columns.size() == 1 && table.cell(row, columns[0]).empty()) out += "\"\"";
  out += '\n';
}

std::string header_line(const Table& table, const std::vector<std::size_t>& columns) {
  std::string out;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (k) out += ',';
    out += csv_escape(table.schema().column(columns[k]).name);
  }
  out += '\n';
  return out;
}

std::vector<std::size_t> all_columns(const Table& table) {
  std::vector<std::size_t> cols(table.column_count());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  return cols;
}

}  // namespace

std::string to_csv_text(const Table& table, RowRange rows) {
  if (rows.begin > rows.end || rows.end > table.row_count()) {
    throw TableError(TableError::Kind::kOutOfRange,
                     "row range [" + std::to_string(rows.begin) + ", " +
                         std::to_string(rows.end) + ") out of range");
  }
  const auto cols = all_columns(table);
  std::string out = header_line(table, cols);
  for (std::size_t r = rows.begin; r < rows.end; ++r) append_line(out, table, r, cols);
  return out;
}

std::string to_csv_text(const Table& table) {
  return to_csv_text(table, RowRange{0, table.row_count()});
}

std::string to_csv_text(const Table& table, const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& columns) {
  for (auto c : columns) {
    if (c >= table.column_count()) {
      throw TableError(TableError::Kind::kOutOfRange, "column index out of range");
    }
  }
  std::string out = header_line(table, columns);
  for (auto r : rows) {
    if (r >= table.row_count()) {
      throw TableError(TableError::Kind::kOutOfRange,
                       "row index " + std::to_string(r) + " out of range");
    }
    append_line(out, table, r, columns);
  }
  return out;
}

}  // namespace lmldap

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

#include "lmldap/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>

#include "lmldap/table.hpp"

namespace lmldap {
namespace {

std::string_view trim(std::string_view s) {
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Lowercase with spaces, underscores and dots removed: "Num_rows" -> "numrows".
std::string squash(std::string_view s) {
  std::string out;
  for (char c : lower(s)) {
    if (c != ' ' && c != '_' && c != '.') out += c;
  }
  return out;
}

std::string strip_emphasis(std::string_view s) {
  s = trim(s);
  while (s.size() >= 2 && (s.front() == '*' || s.front() == '_') &&
         s.back() == s.front()) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return std::string(s);
}

std::string format_avg(double avg, AvgPrecision precision) {
  if (precision == AvgPrecision::kExact) return format_decimal(avg);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", avg);
  std::string out(buf);
  if (out == "-0.00") out = "0.00";
  while (out.size() > 1 && out.back() == '0' && out[out.size() - 2] != '.') {
    out.pop_back();
  }
  return out;
}

std::size_t decimals_of(std::string_view number) {
  auto dot = number.find('.');
  if (dot == std::string_view::npos) return 0;
  std::size_t n = 0;
  for (std::size_t i = dot + 1; i < number.size() && number[i] >= '0' && number[i] <= '9'; ++i) {
    ++n;
  }
  return n;
}

bool is_separator_row(const std::vector<std::string>& cells) {
  bool any = false;
  for (const auto& c : cells) {
    auto t = trim(c);
    if (t.empty()) continue;
    if (t.find_first_not_of("-:= ") != std::string_view::npos) return false;
    any = true;
  }
  return any;
}

std::vector<std::vector<std::string>> split_delimited(std::string_view text, char delim) {
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    std::string_view line =
        trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty()) continue;
    if (line.front() == delim) line.remove_prefix(1);
    if (!line.empty() && line.back() == delim) line.remove_suffix(1);
    std::vector<std::string> cells;
    std::size_t p = 0;
    for (;;) {
      auto bar = line.find(delim, p);
      cells.emplace_back(trim(line.substr(p, bar == std::string_view::npos ? std::string_view::npos : bar - p)));
      if (bar == std::string_view::npos) break;
      p = bar + 1;
    }
    if (is_separator_row(cells)) continue;
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::vector<std::vector<std::string>> split_csv_table(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  for (auto& [line, fields] : parse_csv_records(text, CsvOptions{true})) {
    for (auto& f : fields) f = std::string(trim(f));
    if (is_separator_row(fields)) continue;
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

const LabelPattern* PatternSummary::find(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

std::optional<std::size_t> PatternSummary::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  const std::string key = squash(name);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (squash(columns[i]) == key) return i;
  }
  return std::nullopt;
}

std::string render_range(const NumericRange& range, AvgPrecision precision) {
  return format_decimal(range.min) + "-" + format_decimal(range.max) +
         " (avg: " + format_avg(range.avg, precision) + ")";
}

std::string render_pattern_table(const PatternSummary& summary,
                                 AvgPrecision precision) {
  std::string out = csv_escape("Label (" + summary.label_column + ")");
  for (const auto& c : summary.columns) out += "," + csv_escape(c);
  out += ",Num rows,Comments\n";
  for (const auto& row : summary.rows) {
    out += csv_escape(row.label);
    for (std::size_t i = 0; i < summary.columns.size(); ++i) {
      out += ',';
      if (i >= row.patterns.size() || !row.patterns[i]) continue;
      std::string cell;
      if (const auto* r = std::get_if<NumericRange>(&*row.patterns[i])) {
        cell = render_range(*r, precision);
      } else {
        const auto& values = std::get<CategorySet>(*row.patterns[i]).values;
        for (std::size_t k = 0; k < values.size(); ++k) {
          if (k) cell += ", ";
          cell += values[k];
        }
      }
      out += csv_escape(cell);
    }
    out += "," + std::to_string(row.num_rows) + "," + csv_escape(row.comments) + "\n";
  }
  return out;
}

std::optional<NumericRange> parse_range_cell(std::string_view cell) {
  static const std::regex kRange(
      R"(^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(?:-|\xE2\x80\x93|to)\s*)"
      R"(([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*)"
      R"(\(\s*(?:[aA][vV][gG]\s*:?\s*)?([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*\)\s*$)");
  std::string s(cell);
  std::smatch m;
  if (!std::regex_match(s, m, kRange)) return std::nullopt;
  auto lo = parse_decimal(m[1].str());
  auto hi = parse_decimal(m[2].str());
  auto avg = parse_decimal(m[3].str());
  if (!lo || !hi || !avg || *lo > *hi) return std::nullopt;
  NumericRange r{*lo, *hi, *avg};
  if (r.avg < r.min || r.avg > r.max) {
    // A rounded average may land just outside the range; anything further
    // off than the rounding step is a malformed cell.
    const double slack = 0.5 * std::pow(10.0, -static_cast<double>(decimals_of(m[3].str()))) + 1e-12;
    if (r.avg < r.min - slack || r.avg > r.max + slack) return std::nullopt;
    r.avg = std::clamp(r.avg, r.min, r.max);
  }
  return r;
}

PatternSummary parse_pattern_table(std::string_view text,
                                   std::string_view label_column,
                                   const std::vector<std::string>& expected_labels) {
  text = trim(text);
  std::string_view first_line = text.substr(0, text.find('\n'));
  std::vector<std::vector<std::string>> rows;
  if (first_line.find('|') != std::string_view::npos) {
    rows = split_delimited(text, '|');
  } else if (first_line.find('\t') != std::string_view::npos) {
    rows = split_delimited(text, '\t');
  } else {
    rows = split_csv_table(text);
  }
  if (rows.empty()) throw PatternError(PatternError::Kind::kEmptyTable, "pattern table is empty");

  const auto& header = rows.front();
  std::optional<std::size_t> label_col, rows_col, comments_col;
  std::vector<std::size_t> feature_cols;
  const std::string label_key = squash(label_column);
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = squash(strip_emphasis(header[i]));
    if (!label_col && (h.rfind("label", 0) == 0 || h == label_key)) {
      label_col = i;
    } else if (!rows_col && (h == "numrows" || h == "numberofrows" || h == "rows" || h == "count")) {
      rows_col = i;
    } else if (!comments_col && h.rfind("comment", 0) == 0) {
      comments_col = i;
    } else if (!h.empty()) {
      feature_cols.push_back(i);
    }
  }
  if (!label_col) throw PatternError(PatternError::Kind::kMissingColumn, "missing column 'Label'");
  if (!rows_col) throw PatternError(PatternError::Kind::kMissingColumn, "missing column 'Num rows'");

  PatternSummary out;
  out.label_column = std::string(label_column);
  for (auto i : feature_cols) out.columns.push_back(strip_emphasis(header[i]));

  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto cells = rows[r];
    if (cells.size() > header.size()) {
      throw PatternError(PatternError::Kind::kMalformedCell,
                         "row " + std::to_string(r) + " has more cells than the header");
    }
    cells.resize(header.size());
    auto where = [&](std::size_t col) {
      return "row " + std::to_string(r) + ", column '" + header[col] + "'";
    };

    LabelPattern lp;
    std::string label = strip_emphasis(cells[*label_col]);
    if (!expected_labels.empty()) {
      auto exact = std::find(expected_labels.begin(), expected_labels.end(), label);
      if (exact == expected_labels.end()) {
        auto loose = std::find_if(expected_labels.begin(), expected_labels.end(),
                                  [&](const std::string& e) { return lower(e) == lower(label); });
        if (loose == expected_labels.end()) {
          throw PatternError(PatternError::Kind::kUnknownLabel, "unknown label '" + label + "'");
        }
        label = *loose;
      }
    } else if (label.empty()) {
      throw PatternError(PatternError::Kind::kMalformedCell, where(*label_col) + ": empty label");
    }
    if (out.find(label)) {
      throw PatternError(PatternError::Kind::kDuplicateLabel, "duplicate label '" + label + "'");
    }
    lp.label = label;

    auto count = parse_decimal(strip_emphasis(cells[*rows_col]));
    if (!count || *count < 1 || std::floor(*count) != *count) {
      throw PatternError(PatternError::Kind::kMalformedCell,
                         where(*rows_col) + ": '" + cells[*rows_col] + "' is not a row count");
    }
    lp.num_rows = static_cast<std::size_t>(*count);
    if (comments_col) lp.comments = std::string(trim(cells[*comments_col]));

    for (auto col : feature_cols) {
      std::string_view cell = trim(cells[col]);
      if (cell.empty()) {
        lp.patterns.emplace_back(std::nullopt);
        continue;
      }
      if (auto range = parse_range_cell(cell)) {
        lp.patterns.emplace_back(*range);
        continue;
      }
      // Looks like a range attempt but failed validation.
      if (cell.find("(avg") != std::string_view::npos) {
        throw PatternError(PatternError::Kind::kMalformedCell,
                           where(col) + ": malformed range '" + std::string(cell) + "'");
      }
      std::set<std::string> values;
      std::size_t p = 0;
      for (;;) {
        auto comma = cell.find(',', p);
        auto v = trim(cell.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p));
        if (!v.empty()) values.emplace(v);
        if (comma == std::string_view::npos) break;
        p = comma + 1;
      }
      if (values.empty()) {
        throw PatternError(PatternError::Kind::kMalformedCell,
                           where(col) + ": empty category list");
      }
      lp.patterns.emplace_back(CategorySet{{values.begin(), values.end()}});
    }
    out.rows.push_back(std::move(lp));
  }
  return out;
}

}  // namespace lmldap

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

// Per-label pattern tables: one row per label, one cell per feature holding
// either "min-max (avg: x)" or a "a, b, c" category list, plus row counts and
// free-text comments.

#ifndef LMLDAP_PATTERN_HPP_
#define LMLDAP_PATTERN_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lmldap {

struct NumericRange {
  double min = 0.0;
  double max = 0.0;
  double avg = 0.0;
  friend bool operator==(const NumericRange&, const NumericRange&) = default;
};

// Sorted, distinct, non-empty.
struct CategorySet {
  std::vector<std::string> values;
  friend bool operator==(const CategorySet&, const CategorySet&) = default;
};

using FeaturePattern = std::variant<NumericRange, CategorySet>;

struct LabelPattern {
  std::string label;
  // Parallel to PatternSummary::columns; nullopt when the table left the
  // cell blank.
  std::vector<std::optional<FeaturePattern>> patterns;
  std::size_t num_rows = 0;
  std::string comments;

  friend bool operator==(const LabelPattern&, const LabelPattern&) = default;
};

struct PatternSummary {
  std::string label_column;
  std::vector<std::string> columns;
  std::vector<LabelPattern> rows;

  const LabelPattern* find(std::string_view label) const;
  std::optional<std::size_t> column_index(std::string_view name) const;

  friend bool operator==(const PatternSummary&, const PatternSummary&) = default;
};

class PatternError : public std::runtime_error {
 public:
  enum class Kind {
    kDuplicateLabel,
    kUnknownLabel,
    kMalformedCell,
    kMissingColumn,
    kEmptyTable,
  };

  PatternError(Kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class AvgPrecision {
  kTwoDecimals,  // display form: "5.01"
  kExact,        // shortest round-trip form, used between pipeline stages
};

// "4.3-5.8 (avg: 5.01)"
std::string render_range(const NumericRange& range,
                         AvgPrecision precision = AvgPrecision::kTwoDecimals);

// CSV with header `Label (<label column>),<features...>,Num rows,Comments`.
std::string render_pattern_table(const PatternSummary& summary,
                                 AvgPrecision precision = AvgPrecision::kTwoDecimals);

// Parses CSV, a pipe-delimited table, or a tab-delimited table (separator
// rows ignored). The Label and Num rows columns are required; Comments may be
// absent, as in tables trimmed for display. Cells
// matching "min-max (avg: x)" or "min-max (x)" become NumericRange, other
// non-empty cells become a comma-split CategorySet. Labels are matched exactly,
// then case-insensitively, against `expected_labels`.
PatternSummary parse_pattern_table(std::string_view text,
                                   std::string_view label_column,
                                   const std::vector<std::string>& expected_labels);

std::optional<NumericRange> parse_range_cell(std::string_view cell);

}  // namespace lmldap

#endif  // LMLDAP_PATTERN_HPP_

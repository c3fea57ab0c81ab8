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

// Deterministic stand-in for a language model. Summaries are exact per-label
// statistics, queries are range boxes around the test row, and predictions
// are nearest-centroid on the summary means with span-normalized distance.

#ifndef LMLDAP_ORACLE_HPP_
#define LMLDAP_ORACLE_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmldap/pattern.hpp"
#include "lmldap/step_backend.hpp"
#include "lmldap/table.hpp"

namespace lmldap {

class OracleError : public std::runtime_error {
 public:
  enum class Kind { kIncompatibleParts, kNoNumericColumns, kEmptyInput };

  OracleError(Kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// One row per label present in the rows, in order of first appearance.
PatternSummary oracle_summarize(const Table& table, RowRange rows);
PatternSummary oracle_summarize(const Table& table);

// Per label: min of mins, max of maxes, num_rows-weighted mean of means,
// union of category sets, summed num_rows.
PatternSummary oracle_merge(const std::vector<PatternSummary>& parts);

struct OracleQueryOptions {
  std::size_t max_chars = 350;
  // Half-width of each range as a fraction of the column's global span.
  double span_fraction = 0.1;
};

// `col` >= v-s and `col` <= v+s over numeric features in schema order, as
// many as fit in max_chars. Bounds are rounded outward to 4 decimals.
std::string oracle_query(const Row& test_row, const PatternSummary& summary,
                         const Schema& schema, OracleQueryOptions options = {});

struct OraclePrediction {
  std::string label;
  std::string reason;
  // (label, distance) sorted by distance then label.
  std::vector<std::pair<std::string, double>> ranking;
};

OraclePrediction oracle_predict(const Row& test_row, const PatternSummary& summary,
                                const Schema& schema);

class OracleBackend : public StepBackend {
 public:
  std::string name() const override { return "oracle"; }
  std::string summarize_chunk(const SummarizeChunkInput& input) override;
  std::string merge_summaries(const MergeSummariesInput& input) override;
  // Each retry doubles the range half-width.
  std::string generate_query(const GenerateQueryInput& input) override;
  std::string predict(const PredictInput& input) override;
};

}  // namespace lmldap

#endif  // LMLDAP_ORACLE_HPP_

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

// Orchestration: test-set synthesis, chunked summarization with hierarchical
// merging, query-retry retrieval and per-row prediction.

#ifndef LMLDAP_PIPELINE_HPP_
#define LMLDAP_PIPELINE_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmldap/chunker.hpp"
#include "lmldap/pattern.hpp"
#include "lmldap/report.hpp"
#include "lmldap/step_backend.hpp"
#include "lmldap/table.hpp"

namespace lmldap {

class PipelineError : public std::runtime_error {
 public:
  enum class Kind {
    kEmptyClass,
    kLabelMismatch,
    kSummarizeFailed,
    kMergeFailed,
    kPredictFailed,
    kRowParse,
  };

  PipelineError(Kind kind, std::string message, std::size_t index = 0)
      : std::runtime_error(std::move(message)), kind_(kind), index_(index) {}
  Kind kind() const { return kind_; }
  // Chunk index for kSummarizeFailed, test-row index for kPredictFailed.
  std::size_t index() const { return index_; }

 private:
  Kind kind_;
  std::size_t index_;
};

std::string_view to_string(PipelineError::Kind kind);

struct TestCase {
  std::size_t index = 0;
  Row row;  // schema order, label included
  std::string label;
};

// min(ceil(fraction * n), cap), at least 1.
std::size_t desired_test_rows(std::size_t class_rows, double fraction, std::size_t cap);

// Numeric cells: mean of the present values (the original text is kept when
// both agree). Categorical cells: `a`'s value.
Row average_pair(const Row& a, const Row& b, const Schema& schema);

// Builds a Row from cells, parsing Numeric columns.
Row make_row(std::vector<std::string> cells, const Schema& schema);

std::vector<TestCase> synthesize_test_set(const Table& table, const RunConfig& config);

// Labels in order of first appearance.
std::vector<std::string> label_set(const Table& table);
// Feature column names in schema order.
std::vector<std::string> feature_names(const Schema& schema);
// "name: float64" / "name: object" per feature column, one per line.
std::string dtypes_text(const Schema& schema);
// Header plus one line with the row's feature cells.
std::string test_row_text(const Row& row, const Schema& schema);

struct SummarizeStats {
  std::size_t chunks = 0;
  std::size_t summarize_calls = 0;
  std::size_t merge_calls = 0;
  std::size_t merge_levels = 0;
};

// Merges part summaries into one. When the joined renderings fit
// `config.chunk_budget` tokens a single merge call is made; otherwise parts
// are grouped into maximal fitting batches and merged level by level. A batch
// always takes at least two parts, so oversized summaries still converge.
PatternSummary merge_hierarchically(const std::vector<PatternSummary>& parts,
                                    StepBackend& backend, const RunConfig& config,
                                    const std::string& label_column,
                                    const std::vector<std::string>& labels,
                                    SummarizeStats* stats = nullptr);

PatternSummary summarize_dataset(const Table& table, StepBackend& backend,
                                 const RunConfig& config, SummarizeStats* stats = nullptr);

struct Retrieval {
  std::vector<std::size_t> rows;
  std::string query;  // last query the backend produced
  std::size_t attempts = 0;
  bool failed = false;
  bool truncated = false;
};

Retrieval retrieve_rows(const Row& test_row, const PatternSummary& summary,
                        const Table& table, StepBackend& backend, const RunConfig& config);

// Retrieved rows (all columns) rendered as CSV; empty string for no rows.
std::string retrieved_rows_text(const Table& table, const std::vector<std::size_t>& rows);

// Trims, then matches exactly and finally case-insensitively.
std::optional<std::string> match_label(std::string_view text,
                                       const std::vector<std::string>& labels);

PredictionRecord predict_row(const TestCase& test, const Retrieval& retrieval,
                             const PatternSummary& summary, const Table& table,
                             StepBackend& backend, const RunConfig& config);

struct RunOptions {
  std::string dataset;
  // Receives each record as soon as it is complete.
  std::function<void(const PredictionRecord&)> on_record;
};

RunReport run(const Table& table, StepBackend& backend, const RunConfig& config,
              const RunOptions& options = {});

}  // namespace lmldap

#endif  // LMLDAP_PIPELINE_HPP_

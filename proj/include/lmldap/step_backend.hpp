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

// The four model-facing steps of the pipeline. Every input carries both the
// text a prompt embeds and the structured data it was rendered from, so a
// backend can work from whichever it needs. Each step returns the backend's
// raw reply; the pipeline extracts tags and validates it.
//
// Implementations must be safe to call from several threads at once.

#ifndef LMLDAP_STEP_BACKEND_HPP_
#define LMLDAP_STEP_BACKEND_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmldap/pattern.hpp"
#include "lmldap/table.hpp"

namespace lmldap {

struct SummarizeChunkInput {
  const Table& chunk;
  std::string_view chunk_csv;
  std::string_view label_column;
  const std::vector<std::string>& labels;
};

struct MergeSummariesInput {
  const std::vector<PatternSummary>& parts;
  std::string_view all_summaries;  // parts rendered and joined
  std::string_view label_column;
  const std::vector<std::string>& labels;
};

struct GenerateQueryInput {
  const Schema& schema;
  const PatternSummary& summary;
  const Row& test_row;
  std::string_view dtypes_text;
  std::string_view summary_text;
  std::string_view test_row_text;
  const std::vector<std::string>& columns;
  std::optional<std::string> failed_query;
  int attempt = 1;  // 1-based
};

struct PredictInput {
  const Table& table;
  const std::vector<std::size_t>& retrieved;
  const PatternSummary& summary;
  const Row& test_row;
  std::string_view sample_rows_text;
  std::string_view summary_text;
  std::string_view test_row_text;
  const std::vector<std::string>& labels;
};

class StepBackend {
 public:
  virtual ~StepBackend() = default;

  virtual std::string name() const = 0;
  // Reply contains the table between <patterns> tags.
  virtual std::string summarize_chunk(const SummarizeChunkInput& input) = 0;
  virtual std::string merge_summaries(const MergeSummariesInput& input) = 0;
  // Reply contains the query between <dfquery> tags.
  virtual std::string generate_query(const GenerateQueryInput& input) = 0;
  // Reply contains <prediction> and <reason> tags.
  virtual std::string predict(const PredictInput& input) = 0;
};

}  // namespace lmldap

#endif  // LMLDAP_STEP_BACKEND_HPP_

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

// Run configuration, prediction traces and their on-disk form.
//
// A persisted run is two files:
//   <run>.header.json    schema_version, dataset, backend, created_at, config,
//                        summary, accuracy, record_count, correct_count,
//                        confusion {labels, columns, counts}
//   <run>.records.jsonl  one PredictionRecord object per line
// Field names are listed in docs/report-format.md and are stable for a given
// schema_version.

#ifndef LMLDAP_REPORT_HPP_
#define LMLDAP_REPORT_HPP_

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmldap/chat_client.hpp"
#include "lmldap/chunker.hpp"

namespace lmldap {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kFailedPrediction = "<failed>";

struct RunConfig {
  std::size_t chunk_budget = kDefaultChunkBudget;
  // Unset means twice the chunk budget.
  std::optional<std::size_t> result_budget;
  std::size_t query_max_chars = 350;
  double test_fraction = 0.20;
  std::size_t per_class_cap = 10;
  std::size_t retrieval_max_attempts = 3;
  RetryPolicy step_retry;
  std::uint64_t rng_seed = 42;
  std::size_t parallelism = 1;

  std::size_t effective_result_budget() const {
    return result_budget.value_or(2 * chunk_budget);
  }
  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StepTimings {
  double retrieve_ms = 0.0;
  double predict_ms = 0.0;
  friend bool operator==(const StepTimings&, const StepTimings&) = default;
};

struct PredictionRecord {
  std::size_t test_index = 0;
  std::vector<std::string> test_cells;  // schema order, label included
  std::string truth;
  std::string generated_query;
  std::size_t retrieval_attempts = 0;
  std::vector<std::size_t> retrieved_rows;
  bool retrieval_failed = false;
  std::string predicted_label;  // empty when the prediction failed
  std::string reason;
  bool correct = false;
  std::optional<std::string> error;
  StepTimings timings;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

class ReportError : public std::runtime_error {
 public:
  enum class Kind { kNoRecords, kIo, kSchemaVersionMismatch, kParse };

  ReportError(Kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Rows are true labels, columns are predicted labels plus "<failed>" when any
// prediction failed.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::string> columns;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t at(std::string_view truth, std::string_view predicted) const;
  std::size_t total() const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

double compute_accuracy(const std::vector<PredictionRecord>& records);
// Whole percent, rounded half up: 29/30 -> "97%".
std::string format_percent(std::size_t correct, std::size_t total);
std::string format_percent(const std::vector<PredictionRecord>& records);
ConfusionMatrix confusion_matrix(const std::vector<PredictionRecord>& records);
std::string render_confusion(const ConfusionMatrix& matrix);

struct RunReport {
  std::string dataset;
  std::string backend;
  RunConfig config;
  std::string summary;  // rendered pattern table
  std::vector<PredictionRecord> records;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::string created_at;  // ISO-8601 UTC

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

std::string utc_timestamp_now();

std::string record_to_json_line(const PredictionRecord& record);
PredictionRecord record_from_json_line(const std::string& line);

// `run_path` is the path prefix; ".header.json" / ".records.jsonl" are added.
void persist_report(const RunReport& report, const std::string& run_path);
RunReport load_report(const std::string& run_path);

// Appends records to a JSON-lines file; safe for concurrent callers.
class RecordSink {
 public:
  explicit RecordSink(const std::string& path);
  void append(const PredictionRecord& record);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace lmldap

#endif  // LMLDAP_REPORT_HPP_

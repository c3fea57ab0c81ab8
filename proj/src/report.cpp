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

#include "lmldap/report.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <sstream>

#include <json.hpp>

namespace lmldap {

using json = nlohmann::json;

void RunConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(chunk_budget, "chunk-budget");
  if (result_budget) positive(*result_budget, "result-budget");
  positive(query_max_chars, "query-max-chars");
  positive(per_class_cap, "per-class-cap");
  positive(retrieval_max_attempts, "retrieval-max-attempts");
  positive(parallelism, "parallelism");
  if (!(test_fraction > 0.0 && test_fraction <= 1.0)) {
    throw ConfigError("test-fraction must be in (0, 1]");
  }
  try {
    step_retry.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::size_t ConfusionMatrix::at(std::string_view truth, std::string_view predicted) const {
  auto r = std::find(labels.begin(), labels.end(), truth);
  auto c = std::find(columns.begin(), columns.end(), predicted);
  if (r == labels.end() || c == columns.end()) return 0;
  return counts[static_cast<std::size_t>(r - labels.begin())]
               [static_cast<std::size_t>(c - columns.begin())];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (auto v : row) n += v;
  }
  return n;
}

double compute_accuracy(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw ReportError(ReportError::Kind::kNoRecords, "no prediction records");
  const auto correct = std::count_if(records.begin(), records.end(),
                                     [](const PredictionRecord& r) { return r.correct; });
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

std::string format_percent(std::size_t correct, std::size_t total) {
  if (total == 0) throw ReportError(ReportError::Kind::kNoRecords, "no prediction records");
  const std::size_t pct = (200 * correct + total) / (2 * total);
  return std::to_string(pct) + "%";
}

std::string format_percent(const std::vector<PredictionRecord>& records) {
  const auto correct = std::count_if(records.begin(), records.end(),
                                     [](const PredictionRecord& r) { return r.correct; });
  return format_percent(static_cast<std::size_t>(correct), records.size());
}

ConfusionMatrix confusion_matrix(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw ReportError(ReportError::Kind::kNoRecords, "no prediction records");
  ConfusionMatrix m;
  auto add_label = [&](const std::string& l) {
    if (std::find(m.labels.begin(), m.labels.end(), l) == m.labels.end()) m.labels.push_back(l);
  };
  bool any_failed = false;
  for (const auto& r : records) {
    add_label(r.truth);
    if (r.predicted_label.empty()) {
      any_failed = true;
    } else {
      add_label(r.predicted_label);
    }
  }
  m.columns = m.labels;
  if (any_failed) m.columns.emplace_back(kFailedPrediction);
  m.counts.assign(m.labels.size(), std::vector<std::size_t>(m.columns.size(), 0));
  for (const auto& r : records) {
    const auto row = static_cast<std::size_t>(
        std::find(m.labels.begin(), m.labels.end(), r.truth) - m.labels.begin());
    const std::string_view pred =
        r.predicted_label.empty() ? kFailedPrediction : std::string_view(r.predicted_label);
    const auto col = static_cast<std::size_t>(
        std::find(m.columns.begin(), m.columns.end(), pred) - m.columns.begin());
    ++m.counts[row][col];
  }
  return m;
}

std::string render_confusion(const ConfusionMatrix& m) {
  std::size_t w = std::string_view("truth \\ predicted").size();
  for (const auto& l : m.columns) w = std::max(w, l.size());
  auto pad = [&](const std::string& s) { return s + std::string(w - std::min(w, s.size()) + 2, ' '); };
  std::ostringstream out;
  auto emit = [&](const std::string& first, const std::vector<std::string>& cells) {
    std::string line = pad(first);
    for (const auto& c : cells) line += pad(c);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  };
  emit("truth \\ predicted", m.columns);
  for (std::size_t r = 0; r < m.labels.size(); ++r) {
    std::vector<std::string> cells;
    for (auto v : m.counts[r]) cells.push_back(std::to_string(v));
    emit(m.labels[r], cells);
  }
  return out.str();
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

json config_to_json(const RunConfig& c) {
  json retryable = json::array();
  for (auto k : c.step_retry.retryable) retryable.push_back(std::string(to_string(k)));
  return json{
      {"chunk_budget", c.chunk_budget},
      {"result_budget", c.result_budget ? json(*c.result_budget) : json(nullptr)},
      {"query_max_chars", c.query_max_chars},
      {"test_fraction", c.test_fraction},
      {"per_class_cap", c.per_class_cap},
      {"retrieval_max_attempts", c.retrieval_max_attempts},
      {"step_retry",
       {{"max_attempts", c.step_retry.max_attempts},
        {"base_delay_ms", c.step_retry.base_delay.count()},
        {"backoff_factor", c.step_retry.backoff_factor},
        {"retryable", retryable}}},
      {"rng_seed", c.rng_seed},
      {"parallelism", c.parallelism},
  };
}

BackendError::Kind backend_kind_from(const std::string& name) {
  for (auto k : {BackendError::Kind::kNetwork, BackendError::Kind::kHttpStatus,
                 BackendError::Kind::kRateLimited, BackendError::Kind::kProtocol,
                 BackendError::Kind::kExhaustedRetries}) {
    if (to_string(k) == name) return k;
  }
  throw ReportError(ReportError::Kind::kParse, "unknown error kind '" + name + "'");
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.chunk_budget = j.at("chunk_budget").get<std::size_t>();
  if (!j.at("result_budget").is_null()) c.result_budget = j.at("result_budget").get<std::size_t>();
  c.query_max_chars = j.at("query_max_chars").get<std::size_t>();
  c.test_fraction = j.at("test_fraction").get<double>();
  c.per_class_cap = j.at("per_class_cap").get<std::size_t>();
  c.retrieval_max_attempts = j.at("retrieval_max_attempts").get<std::size_t>();
  const auto& sr = j.at("step_retry");
  c.step_retry.max_attempts = sr.at("max_attempts").get<int>();
  c.step_retry.base_delay = std::chrono::milliseconds(sr.at("base_delay_ms").get<long long>());
  c.step_retry.backoff_factor = sr.at("backoff_factor").get<double>();
  c.step_retry.retryable.clear();
  for (const auto& k : sr.at("retryable")) c.step_retry.retryable.insert(backend_kind_from(k));
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.parallelism = j.at("parallelism").get<std::size_t>();
  return c;
}

json record_to_json(const PredictionRecord& r) {
  return json{
      {"index", r.test_index},
      {"cells", r.test_cells},
      {"truth", r.truth},
      {"query", r.generated_query},
      {"retrieval_attempts", r.retrieval_attempts},
      {"retrieved_rows", r.retrieved_rows},
      {"retrieval_failed", r.retrieval_failed},
      {"predicted", r.predicted_label},
      {"reason", r.reason},
      {"correct", r.correct},
      {"error", r.error ? json(*r.error) : json(nullptr)},
      {"timings_ms", {{"retrieve", r.timings.retrieve_ms}, {"predict", r.timings.predict_ms}}},
  };
}

PredictionRecord record_from_json(const json& j) {
  PredictionRecord r;
  r.test_index = j.at("index").get<std::size_t>();
  r.test_cells = j.at("cells").get<std::vector<std::string>>();
  r.truth = j.at("truth").get<std::string>();
  r.generated_query = j.at("query").get<std::string>();
  r.retrieval_attempts = j.at("retrieval_attempts").get<std::size_t>();
  r.retrieved_rows = j.at("retrieved_rows").get<std::vector<std::size_t>>();
  r.retrieval_failed = j.at("retrieval_failed").get<bool>();
  r.predicted_label = j.at("predicted").get<std::string>();
  r.reason = j.at("reason").get<std::string>();
  r.correct = j.at("correct").get<bool>();
  if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  r.timings.retrieve_ms = j.at("timings_ms").at("retrieve").get<double>();
  r.timings.predict_ms = j.at("timings_ms").at("predict").get<double>();
  return r;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError(ReportError::Kind::kIo, "cannot write '" + path + "'");
  out << content;
  if (!out) throw ReportError(ReportError::Kind::kIo, "failed writing '" + path + "'");
}

}  // namespace

std::string record_to_json_line(const PredictionRecord& record) {
  return record_to_json(record).dump();
}

PredictionRecord record_from_json_line(const std::string& line) {
  return record_from_json(json::parse(line));
}

void persist_report(const RunReport& report, const std::string& run_path) {
  const std::size_t correct = static_cast<std::size_t>(
      std::count_if(report.records.begin(), report.records.end(),
                    [](const PredictionRecord& r) { return r.correct; }));
  json header{
      {"schema_version", kReportSchemaVersion},
      {"dataset", report.dataset},
      {"backend", report.backend},
      {"created_at", report.created_at},
      {"config", config_to_json(report.config)},
      {"summary", report.summary},
      {"accuracy", report.accuracy},
      {"record_count", report.records.size()},
      {"correct_count", correct},
      {"confusion",
       {{"labels", report.confusion.labels},
        {"columns", report.confusion.columns},
        {"counts", report.confusion.counts}}},
  };
  std::string lines;
  for (const auto& r : report.records) lines += record_to_json_line(r) + "\n";
  write_file(run_path + ".header.json", header.dump(2) + "\n");
  write_file(run_path + ".records.jsonl", lines);
}

RunReport load_report(const std::string& run_path) {
  const std::string header_path = run_path + ".header.json";
  const std::string records_path = run_path + ".records.jsonl";
  std::ifstream hin(header_path, std::ios::binary);
  if (!hin) throw ReportError(ReportError::Kind::kIo, "cannot read '" + header_path + "'");
  json header = json::parse(hin, nullptr, false);
  if (header.is_discarded() || !header.is_object()) {
    throw ReportError(ReportError::Kind::kParse, header_path + ": not a JSON object");
  }
  if (!header.contains("schema_version") || !header["schema_version"].is_number_integer() ||
      header["schema_version"].get<int>() != kReportSchemaVersion) {
    throw ReportError(ReportError::Kind::kSchemaVersionMismatch,
                      header_path + ": unsupported schema_version " +
                          (header.contains("schema_version") ? header["schema_version"].dump()
                                                             : std::string("(missing)")) +
                          ", expected " + std::to_string(kReportSchemaVersion));
  }

  RunReport report;
  std::size_t expected_records = 0;
  try {
    report.dataset = header.at("dataset").get<std::string>();
    report.backend = header.at("backend").get<std::string>();
    report.created_at = header.at("created_at").get<std::string>();
    report.config = config_from_json(header.at("config"));
    report.summary = header.at("summary").get<std::string>();
    report.accuracy = header.at("accuracy").get<double>();
    expected_records = header.at("record_count").get<std::size_t>();
    const auto& cm = header.at("confusion");
    report.confusion.labels = cm.at("labels").get<std::vector<std::string>>();
    report.confusion.columns = cm.at("columns").get<std::vector<std::string>>();
    report.confusion.counts = cm.at("counts").get<std::vector<std::vector<std::size_t>>>();
  } catch (const json::exception& e) {
    throw ReportError(ReportError::Kind::kParse, header_path + ": " + e.what());
  }

  std::ifstream rin(records_path, std::ios::binary);
  if (!rin) throw ReportError(ReportError::Kind::kIo, "cannot read '" + records_path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(rin, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      report.records.push_back(record_from_json_line(line));
    } catch (const json::exception& e) {
      throw ReportError(ReportError::Kind::kParse,
                        records_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (report.records.size() != expected_records) {
    throw ReportError(ReportError::Kind::kParse,
                      records_path + ": header declares " + std::to_string(expected_records) +
                          " records, found " + std::to_string(report.records.size()));
  }
  return report;
}

RecordSink::RecordSink(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw ReportError(ReportError::Kind::kIo, "cannot write '" + path + "'");
}

void RecordSink::append(const PredictionRecord& record) {
  const std::string line = record_to_json_line(record) + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  out_ << line;
  out_.flush();
}

}  // namespace lmldap

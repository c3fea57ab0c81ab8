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

#include "lmldap/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "lmldap/chat_client.hpp"
#include "lmldap/prompts.hpp"
#include "lmldap/query.hpp"

namespace lmldap {
namespace {

constexpr std::string_view kPartSeparator = "\n---\n";

// Runs fn(0..n-1) on up to `workers` threads. The exception of the lowest
// failing index is rethrown after all work finishes.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::min(std::max<std::size_t>(workers, 1), n);
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Uniform in [0, bound) by rejection; independent of the standard library's
// distribution implementations so draws are stable across toolchains.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::size_t code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

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

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string join_parts(const std::vector<PatternSummary>& parts, std::size_t begin,
                       std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += kPartSeparator;
    out += render_pattern_table(parts[i]);
  }
  return out;
}

PatternSummary merge_batch(const std::vector<PatternSummary>& batch, StepBackend& backend,
                           const RunConfig& config, const std::string& label_column,
                           const std::vector<std::string>& labels) {
  const std::string joined = join_parts(batch, 0, batch.size());
  MergeSummariesInput input{batch, joined, label_column, labels};
  std::string last_error;
  for (int attempt = 0; attempt < config.step_retry.max_attempts; ++attempt) {
    try {
      const std::string reply = backend.merge_summaries(input);
      return parse_pattern_table(extract_tagged(reply, "patterns"), label_column, labels);
    } catch (const BackendError& e) {
      last_error = e.what();
    } catch (const TagError& e) {
      last_error = e.what();
    } catch (const PatternError& e) {
      last_error = e.what();
    } catch (const TableError& e) {
      last_error = e.what();
    }
  }
  throw PipelineError(PipelineError::Kind::kMergeFailed,
                      "merging " + std::to_string(batch.size()) + " summaries failed: " +
                          last_error);
}

}  // namespace

std::string_view to_string(PipelineError::Kind kind) {
  switch (kind) {
    case PipelineError::Kind::kEmptyClass: return "EmptyClass";
    case PipelineError::Kind::kLabelMismatch: return "LabelMismatch";
    case PipelineError::Kind::kSummarizeFailed: return "SummarizeFailed";
    case PipelineError::Kind::kMergeFailed: return "MergeFailed";
    case PipelineError::Kind::kPredictFailed: return "PredictFailed";
    case PipelineError::Kind::kRowParse: return "RowParseError";
  }
  return "?";
}

std::size_t desired_test_rows(std::size_t class_rows, double fraction, std::size_t cap) {
  // The epsilon keeps 0.2 * 50 at 10 rather than 11 after rounding error.
  const double want = std::ceil(fraction * static_cast<double>(class_rows) - 1e-9);
  const auto d = static_cast<std::size_t>(std::max(want, 1.0));
  return std::min(d, cap);
}

Row make_row(std::vector<std::string> cells, const Schema& schema) {
  Row row;
  row.numbers.assign(schema.size(), std::nan(""));
  for (std::size_t c = 0; c < schema.size() && c < cells.size(); ++c) {
    if (schema.column(c).kind != ColumnKind::kNumeric) continue;
    if (auto v = parse_decimal(cells[c])) row.numbers[c] = *v;
  }
  row.cells = std::move(cells);
  return row;
}

Row average_pair(const Row& a, const Row& b, const Schema& schema) {
  const std::size_t label = schema.label_index();
  if (a.cells.at(label) != b.cells.at(label)) {
    throw PipelineError(PipelineError::Kind::kLabelMismatch,
                        "cannot average rows labeled '" + a.cells[label] + "' and '" +
                            b.cells[label] + "'");
  }
  std::vector<std::string> cells(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c == label || schema.column(c).kind != ColumnKind::kNumeric) {
      cells[c] = a.cells[c];
      continue;
    }
    const double x = a.numbers[c];
    const double y = b.numbers[c];
    if (std::isnan(x) && std::isnan(y)) {
      cells[c] = "";
    } else if (std::isnan(y) || (!std::isnan(x) && a.cells[c] == b.cells[c])) {
      cells[c] = a.cells[c];
    } else if (std::isnan(x)) {
      cells[c] = b.cells[c];
    } else {
      cells[c] = format_decimal((x + y) / 2.0);
    }
  }
  return make_row(std::move(cells), schema);
}

std::vector<TestCase> synthesize_test_set(const Table& table, const RunConfig& config) {
  config.validate();
  std::vector<std::string> order;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    auto it = std::find(order.begin(), order.end(), table.label(r));
    if (it == order.end()) {
      order.push_back(table.label(r));
      members.emplace_back();
      it = order.end() - 1;
    }
    members[static_cast<std::size_t>(it - order.begin())].push_back(r);
  }
  if (order.empty()) throw PipelineError(PipelineError::Kind::kEmptyClass, "table has no rows");

  std::mt19937_64 rng(config.rng_seed);
  std::vector<TestCase> out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& pool = members[k];
    if (pool.empty()) {
      throw PipelineError(PipelineError::Kind::kEmptyClass, "class '" + order[k] + "' is empty");
    }
    const std::size_t d = desired_test_rows(pool.size(), config.test_fraction,
                                            config.per_class_cap);
    std::vector<std::size_t> draws;
    if (2 * d <= pool.size()) {
      // Partial Fisher-Yates.
      for (std::size_t i = 0; i < 2 * d; ++i) {
        const auto j = i + uniform_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
        draws.push_back(pool[i]);
      }
    } else {
      for (std::size_t i = 0; i < 2 * d; ++i) {
        draws.push_back(pool[uniform_below(rng, pool.size())]);
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      Row row = average_pair(table.row(draws[2 * i]), table.row(draws[2 * i + 1]),
                             table.schema());
      TestCase tc;
      tc.index = out.size();
      tc.label = order[k];
      tc.row = std::move(row);
      out.push_back(std::move(tc));
    }
  }
  return out;
}

std::vector<std::string> label_set(const Table& table) {
  std::vector<std::string> out;
  for (const auto& [label, count] : class_counts(table)) out.push_back(label);
  return out;
}

std::vector<std::string> feature_names(const Schema& schema) {
  std::vector<std::string> out;
  for (auto c : schema.feature_indices()) out.push_back(schema.column(c).name);
  return out;
}

std::string dtypes_text(const Schema& schema) {
  std::string out;
  for (auto c : schema.feature_indices()) {
    out += schema.column(c).name;
    out += schema.column(c).kind == ColumnKind::kNumeric ? ": float64\n" : ": object\n";
  }
  return out;
}

std::string test_row_text(const Row& row, const Schema& schema) {
  std::string header, line;
  bool first = true;
  for (auto c : schema.feature_indices()) {
    if (!first) {
      header += ',';
      line += ',';
    }
    first = false;
    header += csv_escape(schema.column(c).name);
    line += csv_escape(c < row.cells.size() ? row.cells[c] : std::string());
  }
  return header + "\n" + line + "\n";
}

PatternSummary merge_hierarchically(const std::vector<PatternSummary>& parts,
                                    StepBackend& backend, const RunConfig& config,
                                    const std::string& label_column,
                                    const std::vector<std::string>& labels,
                                    SummarizeStats* stats) {
  if (parts.empty()) {
    throw PipelineError(PipelineError::Kind::kMergeFailed, "no summaries to merge");
  }
  SummarizeStats local;
  SummarizeStats& s = stats ? *stats : local;
  const auto fits = [&](const std::vector<PatternSummary>& v, std::size_t b, std::size_t e) {
    return count_tokens(join_parts(v, b, e)) <= config.chunk_budget;
  };

  std::vector<PatternSummary> level = parts;
  while (level.size() > 1 && !fits(level, 0, level.size())) {
    std::vector<std::vector<PatternSummary>> batches;
    std::size_t i = 0;
    while (i < level.size()) {
      std::size_t end = i + 1;
      while (end < level.size() && fits(level, i, end + 1)) ++end;
      // Pairs that overflow the budget are still merged so every level
      // shrinks; a lone trailing part is carried up unchanged.
      if (end == i + 1 && end < level.size()) ++end;
      batches.emplace_back(level.begin() + static_cast<std::ptrdiff_t>(i),
                           level.begin() + static_cast<std::ptrdiff_t>(end));
      i = end;
    }
    std::vector<PatternSummary> next(batches.size());
    std::atomic<std::size_t> calls{0};
    parallel_for(batches.size(), config.parallelism, [&](std::size_t b) {
      if (batches[b].size() == 1) {
        next[b] = batches[b].front();
        return;
      }
      ++calls;
      next[b] = merge_batch(batches[b], backend, config, label_column, labels);
    });
    s.merge_calls += calls;
    ++s.merge_levels;
    level = std::move(next);
  }
  ++s.merge_calls;
  ++s.merge_levels;
  return merge_batch(level, backend, config, label_column, labels);
}

PatternSummary summarize_dataset(const Table& table, StepBackend& backend,
                                 const RunConfig& config, SummarizeStats* stats) {
  config.validate();
  SummarizeStats local;
  SummarizeStats& s = stats ? *stats : local;
  const auto chunks = pack_chunks(table, config.chunk_budget);
  const auto labels = label_set(table);
  const std::string& label_column = table.schema().label_column();
  s.chunks = chunks.size();

  std::vector<PatternSummary> parts(chunks.size());
  std::atomic<std::size_t> calls{0};
  parallel_for(chunks.size(), config.parallelism, [&](std::size_t k) {
    const Table chunk = table.slice(chunks[k].rows);
    const std::string csv = to_csv_text(chunk);
    SummarizeChunkInput input{chunk, csv, label_column, labels};
    std::string last_error;
    for (int attempt = 0; attempt < config.step_retry.max_attempts; ++attempt) {
      ++calls;
      try {
        parts[k] = parse_pattern_table(extract_tagged(backend.summarize_chunk(input), "patterns"),
                                       label_column, labels);
        return;
      } catch (const BackendError& e) {
        last_error = e.what();
      } catch (const TagError& e) {
        last_error = e.what();
      } catch (const PatternError& e) {
        last_error = e.what();
      } catch (const TableError& e) {
        last_error = e.what();
      }
    }
    throw PipelineError(PipelineError::Kind::kSummarizeFailed,
                        "summarizing chunk " + std::to_string(k) + " failed: " + last_error, k);
  });
  s.summarize_calls = calls;
  return merge_hierarchically(parts, backend, config, label_column, labels, &s);
}

std::string retrieved_rows_text(const Table& table, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return {};
  std::vector<std::size_t> columns(table.column_count());
  for (std::size_t c = 0; c < columns.size(); ++c) columns[c] = c;
  return to_csv_text(table, rows, columns);
}

Retrieval retrieve_rows(const Row& test_row, const PatternSummary& summary,
                        const Table& table, StepBackend& backend, const RunConfig& config) {
  const Schema& schema = table.schema();
  const std::string dtypes = dtypes_text(schema);
  const std::string summary_text = render_pattern_table(summary);
  const std::string row_text = test_row_text(test_row, schema);
  const std::vector<std::string> columns = feature_names(schema);

  Retrieval out;
  std::optional<std::string> failed;
  for (std::size_t attempt = 1; attempt <= config.retrieval_max_attempts; ++attempt) {
    out.attempts = attempt;
    GenerateQueryInput input{schema,  summary, test_row, dtypes, summary_text,
                             row_text, columns, failed,   static_cast<int>(attempt)};
    const std::string reply = backend.generate_query(input);
    std::string query;
    try {
      query = extract_tagged(reply, "dfquery");
    } catch (const TagError&) {
      // Quote what the model said so the retry prompt can correct it.
      failed = std::string(trim(reply));
      out.query = *failed;
      continue;
    }
    out.query = query;
    failed = query;
    if (code_points(query) > config.query_max_chars) continue;
    std::vector<std::size_t> rows;
    try {
      rows = evaluate_query(parse_query(query, schema), table);
    } catch (const ParseError&) {
      continue;
    }
    if (rows.empty()) continue;

    // Largest prefix whose rendering fits the result budget.
    const std::size_t budget = config.effective_result_budget();
    auto fits = [&](std::size_t n) {
      std::vector<std::size_t> prefix(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n));
      return count_tokens(retrieved_rows_text(table, prefix)) <= budget;
    };
    std::size_t lo = 0, hi = rows.size();
    if (!fits(hi)) {
      while (lo + 1 < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (fits(mid) ? lo : hi) = mid;
      }
      rows.resize(lo);
      out.truncated = true;
    }
    out.rows = std::move(rows);
    out.failed = false;
    return out;
  }
  out.rows.clear();
  out.failed = true;
  return out;
}

std::optional<std::string> match_label(std::string_view text,
                                       const std::vector<std::string>& labels) {
  const std::string_view t = trim(text);
  for (const auto& l : labels) {
    if (l == t) return l;
  }
  const std::string lt = lower(t);
  for (const auto& l : labels) {
    if (lower(l) == lt) return l;
  }
  return std::nullopt;
}

PredictionRecord predict_row(const TestCase& test, const Retrieval& retrieval,
                             const PatternSummary& summary, const Table& table,
                             StepBackend& backend, const RunConfig& config) {
  const auto labels = label_set(table);
  const std::string sample = retrieved_rows_text(table, retrieval.rows);
  const std::string summary_text = render_pattern_table(summary);
  const std::string row_text = test_row_text(test.row, table.schema());
  PredictInput input{table, retrieval.rows, summary, test.row, sample, summary_text, row_text,
                     labels};

  PredictionRecord rec;
  rec.test_index = test.index;
  rec.test_cells = test.row.cells;
  rec.truth = test.label;
  rec.generated_query = retrieval.query;
  rec.retrieval_attempts = retrieval.attempts;
  rec.retrieved_rows = retrieval.rows;
  rec.retrieval_failed = retrieval.failed;

  std::string last_error;
  for (int attempt = 0; attempt < config.step_retry.max_attempts; ++attempt) {
    const std::string reply = backend.predict(input);
    try {
      const std::string raw = extract_tagged(reply, "prediction");
      auto label = match_label(raw, labels);
      if (!label) {
        last_error = "prediction '" + raw + "' is not an available label";
        continue;
      }
      rec.predicted_label = *label;
      try {
        rec.reason = extract_tagged(reply, "reason");
      } catch (const TagError&) {
        rec.reason.clear();
      }
      rec.correct = rec.predicted_label == rec.truth;
      return rec;
    } catch (const TagError& e) {
      last_error = e.what();
    }
  }
  throw PipelineError(PipelineError::Kind::kPredictFailed,
                      "prediction for test row " + std::to_string(test.index) +
                          " failed: " + last_error,
                      test.index);
}

RunReport run(const Table& table, StepBackend& backend, const RunConfig& config,
              const RunOptions& options) {
  config.validate();
  const auto tests = synthesize_test_set(table, config);
  const PatternSummary summary = summarize_dataset(table, backend, config);

  std::vector<PredictionRecord> records(tests.size());
  std::mutex sink_mu;
  parallel_for(tests.size(), config.parallelism, [&](std::size_t i) {
    const TestCase& test = tests[i];
    PredictionRecord rec;
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<Retrieval> retrieval;
    try {
      retrieval = retrieve_rows(test.row, summary, table, backend, config);
    } catch (const BackendError& e) {
      rec.error = std::string("retrieval: ") + e.what();
    }
    const double retrieve_ms = ms_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    if (retrieval) {
      try {
        rec = predict_row(test, *retrieval, summary, table, backend, config);
      } catch (const PipelineError& e) {
        rec.error = e.what();
      } catch (const BackendError& e) {
        rec.error = std::string("prediction: ") + e.what();
      }
    }
    if (rec.error) {
      rec.test_index = test.index;
      rec.test_cells = test.row.cells;
      rec.truth = test.label;
      if (retrieval) {
        rec.generated_query = retrieval->query;
        rec.retrieval_attempts = retrieval->attempts;
        rec.retrieved_rows = retrieval->rows;
        rec.retrieval_failed = retrieval->failed;
      }
      rec.predicted_label.clear();
      rec.correct = false;
    }
    rec.timings.retrieve_ms = retrieve_ms;
    rec.timings.predict_ms = ms_since(t1);
    if (options.on_record) {
      std::lock_guard<std::mutex> lock(sink_mu);
      options.on_record(rec);
    }
    records[i] = std::move(rec);
  });
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.test_index < b.test_index; });

  RunReport report;
  report.dataset = options.dataset;
  report.backend = backend.name();
  report.config = config;
  report.summary = render_pattern_table(summary);
  report.accuracy = compute_accuracy(records);
  report.confusion = confusion_matrix(records);
  report.records = std::move(records);
  report.created_at = utc_timestamp_now();
  return report;
}

}  // namespace lmldap

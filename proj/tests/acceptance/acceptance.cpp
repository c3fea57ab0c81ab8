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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any selected criterion fails.
//
//   acceptance             all criteria
//   acceptance --only 7    one criterion
//   acceptance --http-smoke  live one-row run against a real endpoint

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lmldap/chat_client.hpp"
#include "lmldap/chunker.hpp"
#include "lmldap/cli.hpp"
#include "lmldap/oracle.hpp"
#include "lmldap/pattern.hpp"
#include "lmldap/pipeline.hpp"
#include "lmldap/prompted_backend.hpp"
#include "lmldap/prompts.hpp"
#include "lmldap/query.hpp"
#include "lmldap/report.hpp"
#include "lmldap/table.hpp"
#include "local_server.hpp"
#include "test_support.hpp"

namespace lmldap::acceptance {
namespace {

using ::lmldap::testing::data_path;
using ::lmldap::testing::golden_path;
using ::lmldap::testing::read_file;
using ::lmldap::testing::Rng;

// Collects failure notes for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::size_t checks() const { return checks_; }
  const std::vector<std::string>& failures() const { return failures_; }
  std::string detail;

 private:
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;  // 0: no limit
  std::function<void(Check&)> body;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (auto& rec : parse_csv_records(read_file(path))) out.push_back(std::move(rec.second));
  return out;
}

// 1. Query engine vs naive interpreter.
void query_equivalence(Check& c) {
  Rng rng(20260101);
  ::lmldap::testing::RandomTableOptions opts;
  opts.max_rows = 200;
  opts.max_features = 7;  // plus the label: at most 8 columns
  std::size_t mismatches = 0;
  const int cases = 1000;
  for (int i = 0; i < cases; ++i) {
    const Table t = ::lmldap::testing::random_table(rng, opts);
    const QueryAst ast = ::lmldap::testing::random_query(rng, t, 4);
    const bool same = evaluate_query(ast, t) == ::lmldap::testing::naive_evaluate(ast, t);
    if (!same) {
      ++mismatches;
      if (mismatches <= 5) c.expect(false, "mismatch on " + render_query(ast));
    }
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches");
  c.detail = std::to_string(cases) + " random expressions, " + std::to_string(mismatches) +
             " mismatches";
}

// 2. Chunk packing invariants.
void chunk_invariants(Check& c) {
  Rng rng(20260102);
  std::size_t violations = 0, total_chunks = 0;
  auto violate = [&](bool ok, const std::string& what) {
    if (!ok && ++violations <= 5) c.expect(false, what);
  };
  for (int i = 0; i < 200; ++i) {
    const Table t = ::lmldap::testing::random_table(rng);
    std::size_t min_budget = 0;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
      min_budget = std::max(min_budget, count_tokens(to_csv_text(t, RowRange{r, r + 1})));
    }
    const std::size_t whole = count_tokens(to_csv_text(t));
    const std::size_t budget =
        min_budget + std::uniform_int_distribution<std::size_t>(0, whole - min_budget)(rng);
    const auto chunks = pack_chunks(t, budget);
    total_chunks += chunks.size();
    std::size_t next = 0;
    for (const auto& ch : chunks) {
      const std::string tag = "case " + std::to_string(i) + ": ";
      violate(ch.rows.begin == next, tag + "gap or overlap");
      violate(ch.rows.end > ch.rows.begin, tag + "empty chunk");
      violate(ch.token_count <= budget, tag + "chunk over budget");
      violate(ch.token_count == count_tokens(to_csv_text(t, ch.rows)), tag + "stale token count");
      if (ch.rows.end < t.row_count()) {
        violate(count_tokens(to_csv_text(t, RowRange{ch.rows.begin, ch.rows.end + 1})) > budget,
                tag + "chunk not maximal");
      }
      next = ch.rows.end;
    }
    violate(next == t.row_count(), "case " + std::to_string(i) + ": rows not covered");
  }
  c.expect(violations == 0, std::to_string(violations) + " violations");
  c.detail = "200 tables, " + std::to_string(total_chunks) + " chunks, " +
             std::to_string(violations) + " violations";
}

Table table_with_counts(const std::vector<std::size_t>& counts) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i) {
      rows.push_back({std::to_string(i % 97) + ".5", "class" + std::to_string(k)});
    }
  }
  return Table::from_rows({"x", "label"}, "label", rows);
}

// 3. Test-set sizes per dataset.
void synthesis_counts(Check& c) {
  struct Case {
    std::string name;
    Table table;
    std::size_t expected;
  };
  std::vector<Case> cases;
  cases.push_back({"Iris", load_csv_file(data_path("iris.csv"), "species"), 30});
  cases.push_back({"Wine", load_csv_file(data_path("wine.csv"), "class"), 30});
  cases.push_back({"Raisin", table_with_counts({450, 450}), 20});
  cases.push_back({"Rice", table_with_counts({1630, 2180}), 20});
  cases.push_back({"Mushroom", table_with_counts({4208, 3916}), 20});
  // The reference count for Zoo is 23; no rounding of the 20% / cap-10 rule
  // over its class sizes gives 23, so the adopted ceil rule's 22 is asserted.
  cases.push_back({"Zoo", table_with_counts({41, 20, 5, 13, 4, 8, 10}), 22});
  RunConfig config;
  std::string detail;
  for (const auto& k : cases) {
    const std::size_t got = synthesize_test_set(k.table, config).size();
    c.expect(got == k.expected, k.name + ": got " + std::to_string(got) + ", want " +
                                    std::to_string(k.expected));
    detail += (detail.empty() ? "" : ", ") + k.name + " " + std::to_string(got);
  }
  c.detail = detail + " (Zoo reference count is 23; see README)";
}

// Independent one-pass statistics straight from the CSV text.
struct Stats {
  double min = 1e300, max = -1e300, sum = 0;
  std::size_t n = 0;
};
std::map<std::string, std::vector<Stats>> one_pass_stats(const std::string& path,
                                                         std::size_t features) {
  std::map<std::string, std::vector<Stats>> out;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    auto& s = out[f.back()];
    s.resize(features);
    for (std::size_t i = 0; i < features; ++i) {
      const double v = std::stod(f[i]);
      s[i].min = std::min(s[i].min, v);
      s[i].max = std::max(s[i].max, v);
      s[i].sum += v;
      ++s[i].n;
    }
  }
  return out;
}

// 4. Summary fidelity against the reference Iris table.
void summary_fidelity(Check& c) {
  const Table t = load_csv_file(data_path("iris.csv"), "species");
  OracleBackend oracle;
  const PatternSummary got = summarize_dataset(t, oracle, RunConfig{});
  const PatternSummary reference =
      parse_pattern_table(read_file(data_path("iris_reference_summary.txt")), "species", label_set(t));

  // Our summary must agree with the independent statistics.
  const auto stats = one_pass_stats(data_path("iris.csv"), 4);
  const std::size_t before = c.failures().size();
  for (const auto& row : got.rows) {
    const auto& s = stats.at(row.label);
    c.expect(row.num_rows == s[0].n, row.label + ": num_rows disagrees with one-pass count");
    for (std::size_t f = 0; f < 4; ++f) {
      const auto& r = std::get<NumericRange>(*row.patterns[f]);
      c.expect(r.min == s[f].min && r.max == s[f].max &&
                   std::abs(r.avg - s[f].sum / static_cast<double>(s[f].n)) < 1e-9,
               row.label + "/" + got.columns[f] + ": disagrees with one-pass statistics");
    }
  }

  const bool cross_check_ok = c.failures().size() == before;

  // And reproduce the reference ranges, counts and means.
  std::size_t cells = 0, matching = 0;
  for (const auto& prow : reference.rows) {
    const auto* grow = got.find(prow.label);
    c.expect(grow != nullptr, prow.label + ": missing from summary");
    if (!grow) continue;
    c.expect(grow->num_rows == prow.num_rows,
             prow.label + ": num_rows " + std::to_string(grow->num_rows) + " vs reference " +
                 std::to_string(prow.num_rows));
    for (std::size_t f = 0; f < reference.columns.size(); ++f) {
      const auto gi = got.column_index(reference.columns[f]);
      if (!gi || !prow.patterns[f]) continue;
      const auto& p = std::get<NumericRange>(*prow.patterns[f]);
      const auto& g = std::get<NumericRange>(*grow->patterns[*gi]);
      ++cells;
      const bool range_ok = g.min == p.min && g.max == p.max;
      const bool mean_ok = std::abs(g.avg - p.avg) <= 0.005 + 1e-12;
      if (range_ok && mean_ok) {
        ++matching;
        continue;
      }
      c.expect(false, prow.label + "/" + reference.columns[f] + ": computed " +
                          render_range(g) + " vs reference " + render_range(p));
    }
  }
  c.detail = std::to_string(matching) + "/" + std::to_string(cells) +
             " reference cells reproduced; one-pass cross-check " +
             (cross_check_ok ? "agrees" : "DISAGREES");
}

// 5. Merge associativity.
void merge_associativity(Check& c) {
  Rng rng(20260105);
  std::size_t mean_checks = 0, mean_skipped = 0;
  for (int i = 0; i < 100; ++i) {
    // Alternate complete tables with ones that have missing cells.
    ::lmldap::testing::RandomTableOptions opts;
    opts.missing_rate = i % 2 ? 0.1 : 0.0;
    const Table t = ::lmldap::testing::random_table(rng, opts);
    std::size_t min_budget = 0;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
      min_budget = std::max(min_budget, count_tokens(to_csv_text(t, RowRange{r, r + 1})));
    }
    const std::size_t budget = min_budget + rng() % (min_budget * 3 + 1);
    std::vector<PatternSummary> parts;
    for (const auto& ch : pack_chunks(t, budget)) parts.push_back(oracle_summarize(t, ch.rows));
    const PatternSummary merged = oracle_merge(parts);
    const PatternSummary whole = oracle_summarize(t);
    const std::string tag = "table " + std::to_string(i) + ": ";
    c.expect(merged.rows.size() == whole.rows.size(), tag + "label count differs");
    const auto features = t.schema().feature_indices();
    for (const auto& w : whole.rows) {
      const auto* m = merged.find(w.label);
      c.expect(m != nullptr, tag + "label lost");
      if (!m) continue;
      c.expect(m->num_rows == w.num_rows, tag + w.label + " num_rows differs");
      for (std::size_t f = 0; f < w.patterns.size(); ++f) {
        c.expect(m->patterns[f].has_value() == w.patterns[f].has_value(),
                 tag + "presence differs");
        if (!w.patterns[f] || !m->patterns[f]) continue;
        const auto* wr = std::get_if<NumericRange>(&*w.patterns[f]);
        if (!wr) {
          c.expect(*m->patterns[f] == *w.patterns[f], tag + "category set differs");
          continue;
        }
        const auto& mr = std::get<NumericRange>(*m->patterns[f]);
        c.expect(mr.min == wr->min && mr.max == wr->max, tag + "range differs");
        // Row-count weighting reproduces the cell mean only when the label
        // has no missing cells in the column.
        bool complete = true;
        for (std::size_t r = 0; r < t.row_count() && complete; ++r) {
          complete = !(t.label(r) == w.label && t.missing(r, features[f]));
        }
        if (!complete) {
          ++mean_skipped;
          continue;
        }
        ++mean_checks;
        c.expect(std::abs(mr.avg - wr->avg) <= 1e-9, tag + "mean differs by " +
                                                          std::to_string(mr.avg - wr->avg));
      }
    }
  }
  c.detail = "100 tables (half with missing cells), " + std::to_string(c.checks()) + " checks; means compared on " +
             std::to_string(mean_checks) + " complete columns (" + std::to_string(mean_skipped) +
             " with missing cells checked for range only)";
}

// 6. Pattern table round trip.
void pattern_round_trip(Check& c) {
  Rng rng(20260106);
  for (int i = 0; i < 100; ++i) {
    const PatternSummary s =
        ::lmldap::testing::random_summary(rng, 1 + rng() % 6, 1 + rng() % 9);
    std::vector<std::string> labels;
    for (const auto& r : s.rows) labels.push_back(r.label);
    const std::string text = render_pattern_table(s);
    bool same = false;
    try {
      same = parse_pattern_table(text, s.label_column, labels) == s;
    } catch (const std::exception& e) {
      c.expect(false, std::string("summary ") + std::to_string(i) + ": " + e.what());
    }
    c.expect(same, "summary " + std::to_string(i) + " did not round-trip");
  }
  try {
    const auto t1 = parse_pattern_table(read_file(data_path("iris_reference_summary.txt")), "species",
                                        {"Iris-setosa", "Iris-versicolor", "Iris-virginica"});
    c.expect(t1.rows.size() == 3, "reference table: expected 3 rows");
  } catch (const std::exception& e) {
    c.expect(false, std::string("reference table failed to parse: ") + e.what());
  }
  c.detail = "100 random summaries plus the reference Iris table";
}

// 7. End-to-end oracle run vs the standalone nearest-centroid script.
void end_to_end(Check& c) {
  const std::string dir = ::lmldap::testing::make_temp_dir("acceptance");
  std::ostringstream out, err;
  CliEnvironment env;
  env.getenv = [](const std::string&) { return std::nullopt; };
  const int code = run_cli({"run", "--data", data_path("iris.csv"), "--label", "species",
                            "--backend", "oracle", "--seed", "42", "--out", dir, "--quiet"},
                           out, err, env);
  c.expect(code == kExitOk, "exit code " + std::to_string(code) + ": " + err.str());
  if (code != kExitOk) return;
  const RunReport rep = load_report(dir + "/iris");
  c.expect(rep.records.size() == 30, std::to_string(rep.records.size()) + " records");
  c.expect(rep.accuracy >= 0.9, "accuracy " + fmt(rep.accuracy));

  const auto testset = read_csv(data_path("iris_seed42_testset.csv"));
  const auto expected = read_csv(data_path("iris_seed42_expected.csv"));
  c.expect(testset.size() == 31 && expected.size() == 31, "fixture sizes");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < rep.records.size() && i + 1 < expected.size(); ++i) {
    const auto& r = rep.records[i];
    c.expect(r.test_cells == testset[i + 1],
             "test row " + std::to_string(i) + " differs from the exported fixture");
    const std::string& want = expected[i + 1][1];
    if (r.predicted_label == want) {
      ++agree;
    } else {
      c.expect(false, "row " + std::to_string(i) + ": predicted " + r.predicted_label +
                          ", script says " + want);
    }
  }
  c.detail = std::to_string(rep.records.size()) + " records, accuracy " +
             format_percent(rep.records) + ", " + std::to_string(agree) +
             "/30 identical to the nearest-centroid script";
}

// 8. Query retry protocol through the prompted backend.
void retrieval_retry(Check& c) {
  const Table t = load_csv_file(data_path("iris.csv"), "species");
  const PatternSummary summary = oracle_summarize(t);
  const std::string empty_q = "petal_length > 100";
  std::string long_q = "petal_length < 2.5";
  while (long_q.size() <= 350) long_q += " and petal_length < 2.5";
  const std::string good_q = "petal_length < 2.5";

  auto transport = std::make_shared<::lmldap::testing::FakeTransport>();
  transport->push_reply("<dfquery>" + empty_q + "</dfquery>");
  transport->push_reply("<dfquery>" + long_q + "</dfquery>");
  transport->push_reply("<dfquery>" + good_q + "</dfquery>");
  auto client = std::make_shared<ChatClient>(EndpointConfig{"http://fake/v1/chat/completions", "k"},
                                             RetryPolicy{}, transport, 1);
  PromptedBackend backend(client, {"scripted", 0.0, PromptSet::builtin()});
  const Retrieval r = retrieve_rows(t.row(0), summary, t, backend, RunConfig{});

  c.expect(r.attempts == 3, "attempts = " + std::to_string(r.attempts));
  c.expect(!r.rows.empty() && !r.failed, "no rows retrieved");
  const auto prompts = transport->prompts();
  c.expect(prompts.size() == 3, std::to_string(prompts.size()) + " prompts sent");
  const std::string line = "Last query that returned empty response: ";
  if (prompts.size() == 3) {
    c.expect(prompts[0].find(line) == std::string::npos, "first prompt has a retry line");
    c.expect(prompts[1].find(line + "'" + empty_q + "'") != std::string::npos,
             "second prompt does not quote the empty-result query");
    c.expect(prompts[2].find(line + "'" + long_q + "'") != std::string::npos,
             "third prompt does not quote the over-length query");
  }
  c.detail = "attempts " + std::to_string(r.attempts) + ", " + std::to_string(r.rows.size()) +
             " rows; retry prompts quote the previous query";
}

// 9. Transport retry against a counting local endpoint.
void transport_retry(Check& c) {
  ChatRequest req;
  req.model = "m";
  req.messages.push_back({Role::kUser, "ping"});
  RetryPolicy policy;
  policy.max_attempts = 3;
  const Sleeper no_sleep = [](std::chrono::milliseconds) {};
  HttpTransport transport(std::chrono::seconds(5));
  {
    ::lmldap::testing::LocalChatServer server({{429, std::nullopt}, {500, std::nullopt}}, "pong");
    std::string reply;
    try {
      reply = complete(req, {chat_completions_url(server.base_url()), "k"}, policy, transport,
                       no_sleep);
    } catch (const std::exception& e) {
      c.expect(false, std::string("429,500,200 failed: ") + e.what());
    }
    c.expect(reply == "pong", "429,500,200: wrong reply");
    c.expect(server.request_count() == 3,
             "429,500,200: " + std::to_string(server.request_count()) + " requests");
  }
  {
    ::lmldap::testing::LocalChatServer server(
        {{429, std::nullopt}, {429, std::nullopt}, {429, std::nullopt}, {429, std::nullopt}});
    bool exhausted = false;
    try {
      complete(req, {chat_completions_url(server.base_url()), "k"}, policy, transport, no_sleep);
    } catch (const BackendError& e) {
      exhausted = e.kind() == BackendError::Kind::kExhaustedRetries;
    }
    c.expect(exhausted, "429x3: not ExhaustedRetries");
    c.expect(server.request_count() == 3,
             "429x3: " + std::to_string(server.request_count()) + " requests");
  }
  c.detail = "429,500,200 -> success in 3 requests; 429x3 -> ExhaustedRetries in 3 requests";
}

// 10. Prompt templates vs golden transcriptions.
void prompt_fidelity(Check& c) {
  for (PromptKind kind : {PromptKind::kSummarizeChunk, PromptKind::kMergeSummaries,
                          PromptKind::kGenerateQuery, PromptKind::kGenerateQueryRetry,
                          PromptKind::kPredict}) {
    const std::string name = ::lmldap::testing::golden_name(kind);
    const std::string got = render_prompt(kind, ::lmldap::testing::sentinel_context());
    const std::string want = read_file(golden_path(name));
    std::size_t at = 0;
    while (at < got.size() && at < want.size() && got[at] == want[at]) ++at;
    c.expect(got == want, name + " differs at byte " + std::to_string(at));
  }
  c.detail = "5 rendered templates byte-identical to tests/golden";
}

// 11. Whole-percent accuracy.
void accuracy_reporting(Check& c) {
  c.expect(format_percent(29, 30) == "97%", "29/30 -> " + format_percent(29, 30));
  c.expect(format_percent(7, 20) == "35%", "7/20 -> " + format_percent(7, 20));
  for (std::size_t k = 0; k <= 30; ++k) {
    if (k != 29) c.expect(format_percent(k, 30) != "97%", std::to_string(k) + "/30 also 97%");
  }
  for (std::size_t k = 0; k <= 20; ++k) {
    if (k != 7) c.expect(format_percent(k, 20) != "35%", std::to_string(k) + "/20 also 35%");
  }
  c.detail = "29/30 -> 97% and 7/20 -> 35%, each the only such fraction";
}

// 12. Live-model accuracy is out of scope.
void non_reproducibility(Check& c) {
  c.expect(true, "");
  c.detail =
      "live-model accuracy figures are not acceptance targets; the one-row http smoke test "
      "runs only with -DLMLDAP_HTTP_SMOKE=ON (acceptance --http-smoke)";
}

int http_smoke() {
  const CliEnvironment env = process_environment();
  auto model = env.getenv("LMLDAP_MODEL");
  if (!model) {
    std::cout << "[FAIL] http smoke: set LMLDAP_MODEL, LMLDAP_BASE_URL and LMLDAP_API_KEY\n";
    return 1;
  }
  std::ostringstream out, err;
  const int code = run_cli({"predict", "--data", data_path("iris.csv"), "--label", "species",
                            "--backend", "http", "--model", *model, "--row",
                            "sepal_length=5.0, sepal_width=3.4, petal_length=1.5, "
                            "petal_width=0.2"},
                           out, err, env);
  std::cout << out.str() << err.str();
  std::cout << (code == kExitOk ? "[PASS]" : "[FAIL]") << " http smoke: exit " << code << "\n";
  return code == kExitOk ? 0 : 1;
}

}  // namespace
}  // namespace lmldap::acceptance

int main(int argc, char** argv) {
  using namespace lmldap::acceptance;
  CLI::App app{"acceptance criteria"};
  int only = 0;
  bool smoke = false;
  app.add_option("--only", only, "run a single criterion (1-12)")->check(CLI::Range(1, 12));
  app.add_flag("--http-smoke", smoke, "one-row prediction against a live endpoint");
  CLI11_PARSE(app, argc, argv);
  if (smoke) return http_smoke();

  const std::vector<Criterion> criteria{
      {1, "query engine agrees with the naive interpreter", 10, query_equivalence},
      {2, "chunk packing invariants", 10, chunk_invariants},
      {3, "test-set sizes", 0, synthesis_counts},
      {4, "Iris summary reproduces the reference table", 1, summary_fidelity},
      {5, "chunked merge equals whole-table summary", 10, merge_associativity},
      {6, "pattern table round trip", 5, pattern_round_trip},
      {7, "end-to-end oracle run matches nearest-centroid script", 5, end_to_end},
      {8, "query retry protocol", 0, retrieval_retry},
      {9, "transport retry", 0, transport_retry},
      {10, "prompt templates match golden files", 0, prompt_fidelity},
      {11, "accuracy reporting", 0, accuracy_reporting},
      {12, "live-model results are not targets", 0, non_reproducibility},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    if (only && cr.id != only) continue;
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.time_limit_s > 0) {
      check.expect(secs < cr.time_limit_s,
                   "took " + fmt(secs, 2) + " s, limit " + fmt(cr.time_limit_s, 0) + " s");
    }
    std::cout << (check.ok() ? "[PASS]" : "[FAIL]") << " C" << cr.id << " " << cr.title << ": "
              << check.detail << " (" << fmt(secs, 2) << " s)\n";
    for (const auto& f : check.failures()) std::cout << "       - " << f << "\n";
    if (!check.ok()) ++failed;
  }
  return failed ? 1 : 0;
}

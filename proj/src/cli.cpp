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

#include "lmldap/cli.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>

#include "lmldap/oracle.hpp"
#include "lmldap/pipeline.hpp"
#include "lmldap/prompted_backend.hpp"
#include "lmldap/prompts.hpp"

namespace lmldap {
namespace {

namespace fs = std::filesystem;

struct Setting {
  const char* key;
  const char* help;
  const char* type = "TEXT";
  bool predict_only = false;
};

// Keys double as flag names, config-file keys and (upper-cased, '-' -> '_',
// LMLDAP_ prefix) environment variable names.
const std::vector<Setting>& settings() {
  static const std::vector<Setting> all = {
      {"data", "training CSV file", "PATH"},
      {"label", "label column name"},
      {"backend", "oracle or http"},
      {"model", "model name for the http backend"},
      {"base-url", "chat-completions base URL for the http backend"},
      {"seed", "RNG seed for test-set synthesis", "UINT"},
      {"chunk-budget", "tokens per summarized chunk", "UINT"},
      {"result-budget", "tokens of retrieved rows (default: 2x chunk budget)", "UINT"},
      {"query-max-chars", "maximum generated query length", "UINT"},
      {"test-fraction", "fraction of each class used for test rows", "RATIO"},
      {"per-class-cap", "maximum test rows per class", "UINT"},
      {"retrieval-max-attempts", "query generation attempts per test row", "UINT"},
      {"step-max-attempts", "attempts per backend step", "UINT"},
      {"parallelism", "concurrent backend calls", "UINT"},
      {"out", "output directory for report files", "DIR"},
      {"prompt-dir", "directory overriding the built-in prompt templates", "DIR"},
      {"quiet", "send human-oriented tables to standard error"},
      {"summary", "stored summary file (output of `summarize`)", "PATH", true},
      {"row", "test row as k=v,k=v,...", "TEXT", true},
      {"row-file", "CSV file with a header and one test row", "PATH", true},
  };
  return all;
}

std::string env_name(std::string_view key) {
  std::string out = "LMLDAP_";
  for (char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

std::string_view trim(std::string_view s) {
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_ratio(const std::string& key, const std::string& value) {
  auto v = parse_decimal(value);
  if (!v) throw ConfigError(key + ": expected a number, got '" + value + "'");
  return *v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = [&] {
    std::string s(trim(value));
    for (auto& c : s) c = static_cast<char>(std::tolower(c));
    return s;
  }();
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CliConfig resolve(const std::string& command, const std::map<std::string, std::string>& merged) {
  CliConfig c;
  c.command = command;
  auto get = [&](const char* key) -> const std::string* {
    auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };
  if (auto v = get("data")) c.data = *v;
  if (auto v = get("label")) c.label = *v;
  if (auto v = get("backend")) c.backend = *v;
  if (auto v = get("model")) c.model = *v;
  if (auto v = get("base-url")) c.base_url = *v;
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("prompt-dir")) c.prompt_dir = *v;
  if (auto v = get("quiet")) c.quiet = parse_bool("quiet", *v);
  if (auto v = get("summary")) c.summary_path = *v;
  if (auto v = get("row")) c.row = *v;
  if (auto v = get("row-file")) c.row_file = *v;

  RunConfig& r = c.run;
  if (auto v = get("seed")) r.rng_seed = parse_integer<std::uint64_t>("seed", *v);
  if (auto v = get("chunk-budget")) r.chunk_budget = parse_integer<std::size_t>("chunk-budget", *v);
  if (auto v = get("result-budget")) {
    r.result_budget = parse_integer<std::size_t>("result-budget", *v);
  }
  if (auto v = get("query-max-chars")) {
    r.query_max_chars = parse_integer<std::size_t>("query-max-chars", *v);
  }
  if (auto v = get("test-fraction")) r.test_fraction = parse_ratio("test-fraction", *v);
  if (auto v = get("per-class-cap")) {
    r.per_class_cap = parse_integer<std::size_t>("per-class-cap", *v);
  }
  if (auto v = get("retrieval-max-attempts")) {
    r.retrieval_max_attempts = parse_integer<std::size_t>("retrieval-max-attempts", *v);
  }
  if (auto v = get("step-max-attempts")) {
    r.step_retry.max_attempts = parse_integer<int>("step-max-attempts", *v);
  }
  if (auto v = get("parallelism")) r.parallelism = parse_integer<std::size_t>("parallelism", *v);

  if (c.backend != "oracle" && c.backend != "http") {
    throw ConfigError("backend: expected 'oracle' or 'http', got '" + c.backend + "'");
  }
  if (c.label.empty()) throw ConfigError("--label is required");
  if (c.data.empty()) throw ConfigError("--data is required");
  r.validate();
  return c;
}

std::unique_ptr<StepBackend> make_backend(const CliConfig& c, const CliEnvironment& env) {
  if (c.backend == "oracle") return std::make_unique<OracleBackend>();
  auto key = env.getenv ? env.getenv("LMLDAP_API_KEY") : std::nullopt;
  if (!key || key->empty()) {
    throw ConfigError("LMLDAP_API_KEY is not set; it is required for --backend http");
  }
  if (c.base_url.empty()) {
    throw ConfigError("--base-url (or LMLDAP_BASE_URL) is required for --backend http");
  }
  if (c.model.empty()) throw ConfigError("--model is required for --backend http");
  PromptedBackendOptions options;
  options.model = c.model;
  if (!c.prompt_dir.empty()) options.prompts = PromptSet::from_directory(c.prompt_dir);
  auto transport = env.transport ? env.transport : std::make_shared<HttpTransport>();
  auto client = std::make_shared<ChatClient>(
      EndpointConfig{chat_completions_url(c.base_url), *key}, c.run.step_retry, transport,
      c.run.parallelism);
  return std::make_unique<PromptedBackend>(client, std::move(options));
}

// Test row from --row or --row-file; label cell empty when not given.
Row read_test_row(const CliConfig& c, const Schema& schema) {
  std::vector<std::pair<std::string, std::string>> pairs;
  auto row_error = [](const std::string& m) {
    return PipelineError(PipelineError::Kind::kRowParse, m);
  };
  if (!c.row.empty() && !c.row_file.empty()) throw ConfigError("give either --row or --row-file");
  if (!c.row.empty()) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> recs;
    try {
      recs = parse_csv_records(c.row, CsvOptions{true});
    } catch (const TableError& e) {
      throw row_error(std::string("--row: ") + e.what());
    }
    if (recs.size() != 1) throw row_error("--row must be a single line of k=v pairs");
    for (const auto& field : recs.front().second) {
      auto eq = field.find('=');
      if (eq == std::string::npos) throw row_error("--row: expected k=v, got '" + field + "'");
      pairs.emplace_back(std::string(trim(std::string_view(field).substr(0, eq))),
                         std::string(trim(std::string_view(field).substr(eq + 1))));
    }
  } else if (!c.row_file.empty()) {
    const auto recs = parse_csv_records(read_text_file(c.row_file));
    if (recs.size() != 2) throw row_error(c.row_file + ": expected a header and one row");
    const auto& header = recs[0].second;
    const auto& values = recs[1].second;
    if (header.size() != values.size()) throw row_error(c.row_file + ": ragged row");
    for (std::size_t i = 0; i < header.size(); ++i) pairs.emplace_back(header[i], values[i]);
  } else {
    throw ConfigError("predict needs --row or --row-file");
  }

  std::vector<std::string> cells(schema.size());
  std::vector<bool> seen(schema.size(), false);
  for (const auto& [k, v] : pairs) {
    auto idx = schema.find(k);
    if (!idx) throw row_error("unknown column '" + k + "'");
    if (seen[*idx]) throw row_error("column '" + k + "' given twice");
    seen[*idx] = true;
    if (schema.column(*idx).kind == ColumnKind::kNumeric && *idx != schema.label_index() &&
        !parse_decimal(v)) {
      throw row_error("column '" + k + "' needs a number, got '" + v + "'");
    }
    cells[*idx] = v;
  }
  for (auto f : schema.feature_indices()) {
    if (!seen[f] || cells[f].empty()) {
      throw row_error("missing value for feature column '" + schema.column(f).name + "'");
    }
  }
  return make_row(std::move(cells), schema);
}

PatternSummary load_summary(const std::string& path, const Table& table) {
  const std::string text = read_text_file(path);
  const std::string body =
      text.find("<patterns>") != std::string::npos ? extract_tagged(text, "patterns") : text;
  return parse_pattern_table(body, table.schema().label_column(), label_set(table));
}

int cmd_summarize(const CliConfig& c, const CliEnvironment& env, std::ostream& out,
                  std::ostream& err) {
  const Table table = load_csv_file(c.data, c.label);
  auto backend = make_backend(c, env);
  SummarizeStats stats;
  const PatternSummary summary = summarize_dataset(table, *backend, c.run, &stats);
  out << "<patterns>\n" << render_pattern_table(summary) << "</patterns>\n";
  if (!c.quiet) {
    err << "chunks: " << stats.chunks << ", summarize calls: " << stats.summarize_calls
        << ", merge calls: " << stats.merge_calls << "\n";
  }
  return kExitOk;
}

int cmd_run(const CliConfig& c, const CliEnvironment& env, std::ostream& out,
            std::ostream& err) {
  const Table table = load_csv_file(c.data, c.label);
  auto backend = make_backend(c, env);

  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw ReportError(ReportError::Kind::kIo, "cannot create '" + c.out + "': " + ec.message());
  const std::string dataset = fs::path(c.data).stem().string();
  const std::string prefix = (fs::path(c.out) / dataset).string();

  RecordSink sink(prefix + ".records.jsonl");
  RunOptions options;
  options.dataset = dataset;
  options.on_record = [&](const PredictionRecord& r) { sink.append(r); };
  const RunReport report = run(table, *backend, c.run, options);
  persist_report(report, prefix);

  std::size_t correct = 0;
  for (const auto& r : report.records) correct += r.correct;
  out << "dataset: " << report.dataset << "\n"
      << "backend: " << report.backend << "\n"
      << "test rows: " << report.records.size() << "\n"
      << "correct: " << correct << "\n"
      << "accuracy: " << format_percent(report.records) << "\n"
      << "report: " << prefix << ".header.json\n"
      << "records: " << prefix << ".records.jsonl\n";
  std::ostream& human = c.quiet ? err : out;
  human << "\nconfusion matrix:\n" << render_confusion(report.confusion) << "\nsummary:\n"
        << report.summary;
  return kExitOk;
}

int cmd_predict(const CliConfig& c, const CliEnvironment& env, std::ostream& out,
                std::ostream& err) {
  const Table table = load_csv_file(c.data, c.label);
  TestCase test;
  test.row = read_test_row(c, table.schema());
  test.label = test.row.cells[table.schema().label_index()];
  auto backend = make_backend(c, env);

  PatternSummary summary;
  if (!c.summary_path.empty()) {
    try {
      summary = load_summary(c.summary_path, table);
    } catch (const PatternError& e) {
      throw std::ios_base::failure(c.summary_path + ": " + e.what());
    } catch (const TagError& e) {
      throw std::ios_base::failure(c.summary_path + ": " + e.what());
    }
  } else {
    summary = summarize_dataset(table, *backend, c.run);
  }

  Retrieval retrieval;
  PredictionRecord rec;
  try {
    retrieval = retrieve_rows(test.row, summary, table, *backend, c.run);
    rec = predict_row(test, retrieval, summary, table, *backend, c.run);
  } catch (const BackendError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPredict;
  } catch (const PipelineError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPredict;
  }
  out << "query: " << retrieval.query << "\n"
      << "retrieval attempts: " << retrieval.attempts << "\n"
      << "retrieved rows: " << retrieval.rows.size() << (retrieval.failed ? " (failed)" : "")
      << "\n"
      << "prediction: " << rec.predicted_label << "\n"
      << "reason: " << rec.reason << "\n";
  if (!test.label.empty()) out << "truth: " << test.label << "\n";
  return kExitOk;
}

}  // namespace

CliEnvironment process_environment() {
  CliEnvironment env;
  env.getenv = [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
  return env;
}

std::map<std::string, std::string> parse_config_file(const std::string& text) {
  std::set<std::string> known;
  for (const auto& s : settings()) known.insert(s.key);
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(l.substr(0, eq)));
    std::string value(trim(l.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!known.count(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    out[key] = value;
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliEnvironment& env) {
  CLI::App app{"Summarize tabular data with a language model and classify rows by "
               "data-augmented prediction.",
               "lmldap"};
  app.require_subcommand(1);

  std::map<std::string, std::string> flag_values;
  std::string config_path;
  std::vector<std::tuple<std::string, CLI::Option*, CLI::App*>> flag_options;
  auto add_common = [&](CLI::App* sub, bool predict) {
    for (const auto& s : settings()) {
      if (s.predict_only && !predict) continue;
      CLI::Option* opt;
      if (std::string_view(s.key) == "quiet") {
        opt = sub->add_flag_callback("--quiet", [&] { flag_values["quiet"] = "true"; }, s.help);
      } else {
        opt = sub->add_option(std::string("--") + s.key, flag_values[s.key], s.help)
                  ->type_name(s.type);
      }
      flag_options.emplace_back(s.key, opt, sub);
    }
    sub->add_option("--config", config_path, "flat key = value config file")->type_name("PATH");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "summarize, then classify a synthesized test set");
  CLI::App* sum_cmd = app.add_subcommand("summarize", "print the per-label pattern summary");
  CLI::App* pred_cmd = app.add_subcommand("predict", "classify a single row");
  add_common(run_cmd, false);
  add_common(sum_cmd, false);
  add_common(pred_cmd, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  try {
    // Layers, lowest precedence first.
    std::map<std::string, std::string> merged;
    if (config_path.empty() && env.getenv) {
      if (auto v = env.getenv("LMLDAP_CONFIG")) config_path = *v;
    }
    if (!config_path.empty()) {
      std::string text;
      try {
        text = read_text_file(config_path);
      } catch (const std::ios_base::failure&) {
        throw ConfigError("cannot read config file '" + config_path + "'");
      }
      merged = parse_config_file(text);
    }
    for (const auto& s : settings()) {
      if (!env.getenv) break;
      if (auto v = env.getenv(env_name(s.key))) merged[s.key] = *v;
    }
    for (const auto& [key, opt, owner] : flag_options) {
      if (owner == sub && opt->count() > 0) merged[key] = flag_values[key];
    }
    if (command != "predict") {
      for (const auto& s : settings()) {
        if (s.predict_only) merged.erase(s.key);
      }
    }

    CliConfig config;
    try {
      config = resolve(command, merged);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n\n" << sub->help();
      return kExitConfig;
    }
    if (command == "run") return cmd_run(config, env, out, err);
    if (command == "summarize") return cmd_summarize(config, env, out, err);
    return cmd_predict(config, env, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PromptError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TableError& e) {
    err << "error: " << e.what();
    if (e.line()) err << " (line " << e.line() << ")";
    err << "\n";
    switch (e.kind()) {
      case TableError::Kind::kMissingLabelColumn: return kExitConfig;
      case TableError::Kind::kEmptyInput: return kExitSummarize;
      default: return kExitIo;
    }
  } catch (const PipelineError& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case PipelineError::Kind::kRowParse: return kExitConfig;
      case PipelineError::Kind::kPredictFailed: return kExitPredict;
      default: return kExitSummarize;
    }
  } catch (const ChunkError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSummarize;
  } catch (const OracleError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSummarize;
  } catch (const ReportError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace lmldap

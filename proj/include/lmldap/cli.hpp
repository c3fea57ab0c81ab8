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

// Command-line front end: `lmldap run|summarize|predict`.
//
// Every setting can come from a flag, an LMLDAP_* environment variable, or a
// flat `key = value` config file using the flag names; that is also the
// precedence order. Exit codes:
//   0  success
//   2  configuration or usage error (including unparseable --row input)
//   3  summarization failed (includes empty datasets)
//   4  I/O error: unreadable data, malformed CSV, unwritable output
//   5  prediction failed (predict subcommand only)

#ifndef LMLDAP_CLI_HPP_
#define LMLDAP_CLI_HPP_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lmldap/chat_client.hpp"
#include "lmldap/report.hpp"

namespace lmldap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSummarize = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitPredict = 5;

struct CliEnvironment {
  std::function<std::optional<std::string>(const std::string&)> getenv;
  // Used for --backend http; a fresh HttpTransport when null.
  std::shared_ptr<Transport> transport;
};

CliEnvironment process_environment();

// Merged settings for one invocation.
struct CliConfig {
  std::string command;
  std::string data;
  std::string label;
  std::string backend = "oracle";
  std::string model;
  std::string base_url;
  std::string out = ".";
  std::string prompt_dir;
  bool quiet = false;
  RunConfig run;
  // predict only
  std::string summary_path;
  std::string row;
  std::string row_file;
};

// Parses `key = value` lines; '#' starts a comment. Throws ConfigError on
// malformed lines or unknown keys.
std::map<std::string, std::string> parse_config_file(const std::string& text);

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliEnvironment& env = process_environment());

}  // namespace lmldap

#endif  // LMLDAP_CLI_HPP_

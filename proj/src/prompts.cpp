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

#include "lmldap/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

#include "prompts_embedded.hpp"

namespace lmldap {
namespace {

std::string_view trim(std::string_view s) {
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

bool placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == ' ' || c == '_';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::kSummarizeChunk: return "summarize_chunk";
    case PromptKind::kMergeSummaries: return "merge_summaries";
    case PromptKind::kGenerateQuery: return "generate_query";
    case PromptKind::kGenerateQueryRetry: return "generate_query_retry";
    case PromptKind::kPredict: return "predict";
  }
  return "?";
}

const PromptSet& PromptSet::builtin() {
  static const PromptSet set = [] {
    PromptSet p;
    p.version_ = embedded::kPromptSetVersion;
    p.summarize_chunk_ = embedded::kSummarizeChunk;
    p.merge_summaries_ = embedded::kMergeSummaries;
    p.generate_query_ = embedded::kGenerateQuery;
    p.predict_ = embedded::kPredict;
    p.query_retry_line_ = embedded::kQueryRetryLine;
    return p;
  }();
  return set;
}

PromptSet PromptSet::from_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw PromptError(PromptError::Kind::kTemplateNotFound, dir,
                      "prompt directory '" + dir + "' does not exist");
  }
  PromptSet p = builtin();
  p.version_ += "+" + fs::path(dir).filename().string();
  auto load = [&](const char* file, std::string& slot) {
    fs::path path = fs::path(dir) / file;
    if (fs::exists(path)) slot = read_file(path);
  };
  load("summarize_chunk.txt", p.summarize_chunk_);
  load("merge_summaries.txt", p.merge_summaries_);
  load("generate_query.txt", p.generate_query_);
  load("predict.txt", p.predict_);
  load("query_retry_line.txt", p.query_retry_line_);
  return p;
}

std::string PromptSet::text(PromptKind kind) const {
  switch (kind) {
    case PromptKind::kSummarizeChunk: return summarize_chunk_;
    case PromptKind::kMergeSummaries: return merge_summaries_;
    case PromptKind::kGenerateQuery: return generate_query_;
    case PromptKind::kPredict: return predict_;
    case PromptKind::kGenerateQueryRetry: {
      // The retry line goes right after the test data block.
      const std::string anchor = "{test df}\n";
      std::string out = generate_query_;
      auto at = out.find(anchor);
      if (at == std::string::npos) return out + "\n" + query_retry_line_;
      out.insert(at + anchor.size(), "\n" + query_retry_line_);
      return out;
    }
  }
  return {};
}

std::string render_template(std::string_view tmpl, const PromptContext& context) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos && close > i + 1) {
        std::string_view name = tmpl.substr(i + 1, close - i - 1);
        bool looks_like_name = true;
        for (char c : name) looks_like_name = looks_like_name && placeholder_char(c);
        if (looks_like_name) {
          auto it = context.find(name);
          if (it == context.end()) {
            throw PromptError(PromptError::Kind::kMissingPlaceholder, std::string(name),
                              "missing value for placeholder {" + std::string(name) + "}");
          }
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string render_prompt(PromptKind kind, const PromptContext& context,
                          const PromptSet& prompts) {
  return render_template(prompts.text(kind), context);
}

std::string extract_tagged(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  auto start = text.find(open);
  if (start == std::string_view::npos) throw TagError(TagError::Kind::kMissing, std::string(tag));
  start += open.size();
  auto end = text.find(close, start);
  if (end == std::string_view::npos) throw TagError(TagError::Kind::kUnclosed, std::string(tag));

  std::string_view inner = trim(text.substr(start, end - start));
  if (inner.substr(0, 3) == "```") {
    auto nl = inner.find('\n');
    // ```lang on its own line, or a one-line ```query```.
    inner = trim(nl == std::string_view::npos ? inner.substr(3) : inner.substr(nl + 1));
    if (inner.size() >= 3 && inner.substr(inner.size() - 3) == "```") {
      inner = trim(inner.substr(0, inner.size() - 3));
    }
  }
  return std::string(inner);
}

}  // namespace lmldap

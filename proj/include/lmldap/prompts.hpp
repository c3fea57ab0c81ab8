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

#ifndef LMLDAP_PROMPTS_HPP_
#define LMLDAP_PROMPTS_HPP_

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lmldap {

enum class PromptKind {
  kSummarizeChunk,
  kMergeSummaries,
  kGenerateQuery,
  kGenerateQueryRetry,  // kGenerateQuery plus the failed-query line
  kPredict,
};

std::string_view to_string(PromptKind kind);

// Placeholder name (without braces) -> value.
using PromptContext = std::map<std::string, std::string, std::less<>>;

class PromptError : public std::runtime_error {
 public:
  enum class Kind { kMissingPlaceholder, kTemplateNotFound };

  PromptError(Kind kind, std::string name, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind), name_(std::move(name)) {}
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  Kind kind_;
  std::string name_;
};

class PromptSet {
 public:
  // Templates compiled into the library from prompts/*.txt.
  static const PromptSet& builtin();
  // Same file names as prompts/; files that are absent fall back to builtin.
  static PromptSet from_directory(const std::string& dir);

  const std::string& version() const { return version_; }
  std::string text(PromptKind kind) const;

 private:
  std::string version_;
  std::string summarize_chunk_;
  std::string merge_summaries_;
  std::string generate_query_;
  std::string predict_;
  std::string query_retry_line_;
};

// Substitutes `{name}` placeholders in one left-to-right pass; substituted
// values are never rescanned. Only brace groups that look like placeholder
// names (letters, digits, spaces, underscores) are treated as placeholders.
std::string render_template(std::string_view tmpl, const PromptContext& context);

std::string render_prompt(PromptKind kind, const PromptContext& context,
                          const PromptSet& prompts = PromptSet::builtin());

class TagError : public std::runtime_error {
 public:
  enum class Kind { kMissing, kUnclosed };

  TagError(Kind kind, std::string tag)
      : std::runtime_error((kind == Kind::kMissing ? "missing tag <" : "unclosed tag <") + tag + ">"),
        kind_(kind),
        tag_(std::move(tag)) {}
  Kind kind() const { return kind_; }
  const std::string& tag() const { return tag_; }

 private:
  Kind kind_;
  std::string tag_;
};

// Text between the first <tag> and the next </tag>, trimmed, with a wrapping
// ``` code fence removed.
std::string extract_tagged(std::string_view text, std::string_view tag);

}  // namespace lmldap

#endif  // LMLDAP_PROMPTS_HPP_

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

#include "lmldap/prompted_backend.hpp"

namespace lmldap {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

PromptedBackend::PromptedBackend(std::shared_ptr<ChatClient> client,
                                 PromptedBackendOptions options)
    : client_(std::move(client)), options_(std::move(options)) {}

std::string PromptedBackend::ask(PromptKind kind, const PromptContext& context) {
  ChatRequest req;
  req.model = options_.model;
  req.temperature = options_.temperature;
  req.messages.push_back({Role::kUser, render_prompt(kind, context, options_.prompts)});
  return client_->complete(req);
}

std::string PromptedBackend::summarize_chunk(const SummarizeChunkInput& input) {
  return ask(PromptKind::kSummarizeChunk,
             {{"train data chunk", std::string(input.chunk_csv)},
              {"label column", std::string(input.label_column)},
              {"available labels", join(input.labels, ", ")}});
}

std::string PromptedBackend::merge_summaries(const MergeSummariesInput& input) {
  return ask(PromptKind::kMergeSummaries,
             {{"all summaries", std::string(input.all_summaries)},
              {"label column", std::string(input.label_column)},
              {"available labels", join(input.labels, ", ")}});
}

std::string PromptedBackend::generate_query(const GenerateQueryInput& input) {
  PromptContext ctx{{"dtypes data", std::string(input.dtypes_text)},
                    {"summary data", std::string(input.summary_text)},
                    {"test df", std::string(input.test_row_text)},
                    {"available columns", join(input.columns, ", ")}};
  if (input.failed_query) {
    ctx.emplace("df_query", *input.failed_query);
    return ask(PromptKind::kGenerateQueryRetry, ctx);
  }
  return ask(PromptKind::kGenerateQuery, ctx);
}

std::string PromptedBackend::predict(const PredictInput& input) {
  return ask(PromptKind::kPredict,
             {{"query result", std::string(input.sample_rows_text)},
              {"summary data", std::string(input.summary_text)},
              {"test data", std::string(input.test_row_text)},
              {"available labels", join(input.labels, ", ")}});
}

}  // namespace lmldap

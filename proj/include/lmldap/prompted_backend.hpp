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

#ifndef LMLDAP_PROMPTED_BACKEND_HPP_
#define LMLDAP_PROMPTED_BACKEND_HPP_

#include <memory>
#include <string>

#include "lmldap/chat_client.hpp"
#include "lmldap/prompts.hpp"
#include "lmldap/step_backend.hpp"

namespace lmldap {

struct PromptedBackendOptions {
  std::string model;
  double temperature = 0.0;
  PromptSet prompts = PromptSet::builtin();
};

// Renders the step's template and sends it as a single user message.
class PromptedBackend : public StepBackend {
 public:
  PromptedBackend(std::shared_ptr<ChatClient> client, PromptedBackendOptions options);

  std::string name() const override { return "http:" + options_.model; }
  std::string summarize_chunk(const SummarizeChunkInput& input) override;
  std::string merge_summaries(const MergeSummariesInput& input) override;
  std::string generate_query(const GenerateQueryInput& input) override;
  std::string predict(const PredictInput& input) override;

 private:
  std::string ask(PromptKind kind, const PromptContext& context);

  std::shared_ptr<ChatClient> client_;
  PromptedBackendOptions options_;
};

std::string join(const std::vector<std::string>& items, std::string_view sep);

}  // namespace lmldap

#endif  // LMLDAP_PROMPTED_BACKEND_HPP_

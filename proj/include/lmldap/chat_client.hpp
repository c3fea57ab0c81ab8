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

// Chat-completions client.
//
// Wire protocol: POST <url> with
//   {"model": ..., "messages": [{"role": ..., "content": ...}], "temperature": ...}
// and `Authorization: Bearer <key>`. The reply is read from
// choices[0].message.content. A 429 may carry a Retry-After header (seconds).

#ifndef LMLDAP_CHAT_CLIENT_HPP_
#define LMLDAP_CHAT_CLIENT_HPP_

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lmldap {

enum class Role { kSystem, kUser, kAssistant };
std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::size_t max_output_tokens = 0;  // 0 leaves it to the server
};

// Throws std::invalid_argument when the request has no messages or a
// negative temperature.
std::string encode_chat_request(const ChatRequest& request);

class BackendError : public std::runtime_error {
 public:
  enum class Kind { kNetwork, kHttpStatus, kRateLimited, kProtocol, kExhaustedRetries };

  struct Failure {
    Kind kind = Kind::kNetwork;
    int http_status = 0;
    std::optional<double> retry_after_seconds;
    std::string detail;
  };

  explicit BackendError(Failure failure);
  // ExhaustedRetries around the last underlying failure.
  static BackendError exhausted(Failure last, int attempts);

  Kind kind() const { return failure_.kind; }
  const Failure& failure() const { return failure_; }
  // Set only for kExhaustedRetries.
  const std::optional<Failure>& last() const { return last_; }

 private:
  BackendError(Failure failure, Failure last);

  Failure failure_;
  std::optional<Failure> last_;
};

std::string_view to_string(BackendError::Kind kind);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{1000};
  double backoff_factor = 2.0;
  // kHttpStatus here means 5xx responses; other statuses never retry.
  std::set<BackendError::Kind> retryable{BackendError::Kind::kNetwork,
                                         BackendError::Kind::kHttpStatus,
                                         BackendError::Kind::kRateLimited};

  void validate() const;
  bool should_retry(const BackendError::Failure& failure) const;
  // Delay after the failed attempt with 0-based index `attempt`.
  std::chrono::milliseconds delay_for(int attempt,
                                      const BackendError::Failure& failure) const;

  friend bool operator==(const RetryPolicy&, const RetryPolicy&) = default;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::optional<std::string> retry_after;
};

// Thrown by transports for connection-level failures.
class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& body) = 0;
};

// cpp-httplib backed transport; http:// and https:// URLs.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120))
      : timeout_(timeout) {}
  HttpResponse post(const std::string& url,
                    const std::vector<std::pair<std::string, std::string>>& headers,
                    const std::string& body) override;

 private:
  std::chrono::seconds timeout_;
};

struct EndpointConfig {
  std::string url;      // full chat-completions URL
  std::string api_key;
};

// Appends /chat/completions to a base URL unless already present.
std::string chat_completions_url(std::string base_url);

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

// Parses a chat-completions response body; throws BackendError(kProtocol).
std::string decode_chat_response(const std::string& body);

// One request with retries. Never issues more than policy.max_attempts posts.
std::string complete(const ChatRequest& request, const EndpointConfig& endpoint,
                     const RetryPolicy& policy, Transport& transport,
                     const Sleeper& sleep = real_sleeper());

// Shares a transport among concurrent callers, admitting at most
// `parallelism` requests in flight.
class ChatClient {
 public:
  ChatClient(EndpointConfig endpoint, RetryPolicy policy,
             std::shared_ptr<Transport> transport, std::size_t parallelism = 4,
             Sleeper sleep = real_sleeper());

  std::string complete(const ChatRequest& request);

 private:
  EndpointConfig endpoint_;
  RetryPolicy policy_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleep_;
  std::counting_semaphore<1024> slots_;
};

}  // namespace lmldap

#endif  // LMLDAP_CHAT_CLIENT_HPP_

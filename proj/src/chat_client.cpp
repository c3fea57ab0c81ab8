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

#include "lmldap/chat_client.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "lmldap/table.hpp"

namespace lmldap {

using json = nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(BackendError::Kind kind) {
  switch (kind) {
    case BackendError::Kind::kNetwork: return "Network";
    case BackendError::Kind::kHttpStatus: return "HttpStatus";
    case BackendError::Kind::kRateLimited: return "RateLimited";
    case BackendError::Kind::kProtocol: return "Protocol";
    case BackendError::Kind::kExhaustedRetries: return "ExhaustedRetries";
  }
  return "?";
}

namespace {

std::string describe(const BackendError::Failure& f) {
  std::string s(to_string(f.kind));
  if (f.http_status) s += " " + std::to_string(f.http_status);
  if (!f.detail.empty()) s += ": " + f.detail;
  return s;
}

}  // namespace

BackendError::BackendError(Failure failure)
    : std::runtime_error(describe(failure)), failure_(std::move(failure)) {}

BackendError::BackendError(Failure failure, Failure last)
    : std::runtime_error(describe(failure) + " (last: " + describe(last) + ")"),
      failure_(std::move(failure)),
      last_(std::move(last)) {}

BackendError BackendError::exhausted(Failure last, int attempts) {
  if (last.kind == Kind::kExhaustedRetries) {
    throw std::logic_error("ExhaustedRetries cannot wrap ExhaustedRetries");
  }
  Failure outer{Kind::kExhaustedRetries, 0, std::nullopt,
                "gave up after " + std::to_string(attempts) + " attempts"};
  return BackendError(std::move(outer), std::move(last));
}

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw std::invalid_argument("retry max_attempts must be >= 1");
  if (!(backoff_factor >= 1.0)) throw std::invalid_argument("retry backoff_factor must be >= 1");
  if (base_delay.count() < 0) throw std::invalid_argument("retry base_delay must be >= 0");
}

bool RetryPolicy::should_retry(const BackendError::Failure& failure) const {
  if (!retryable.count(failure.kind)) return false;
  if (failure.kind == BackendError::Kind::kHttpStatus) return failure.http_status >= 500;
  return true;
}

std::chrono::milliseconds RetryPolicy::delay_for(
    int attempt, const BackendError::Failure& failure) const {
  if (failure.retry_after_seconds) {
    return std::chrono::milliseconds(
        static_cast<long long>(std::llround(*failure.retry_after_seconds * 1000.0)));
  }
  const double ms =
      static_cast<double>(base_delay.count()) * std::pow(backoff_factor, attempt);
  return std::chrono::milliseconds(static_cast<long long>(std::llround(ms)));
}

std::string encode_chat_request(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw std::invalid_argument("chat request needs at least one message");
  }
  if (!(request.temperature >= 0.0)) {
    throw std::invalid_argument("chat request temperature must be >= 0");
  }
  json body;
  body["model"] = request.model;
  body["messages"] = json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  body["temperature"] = request.temperature;
  if (request.max_output_tokens) body["max_tokens"] = request.max_output_tokens;
  return body.dump();
}

std::string decode_chat_response(const std::string& body) {
  auto protocol = [](std::string detail) {
    return BackendError({BackendError::Kind::kProtocol, 0, std::nullopt, std::move(detail)});
  };
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw protocol("response body is not JSON");
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty()) {
    throw protocol("response has no choices");
  }
  const auto& first = doc["choices"][0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) {
    throw protocol("choices[0] has no message");
  }
  const auto& content = first["message"].value("content", json());
  if (!content.is_string()) throw protocol("choices[0].message.content is not a string");
  return content.get<std::string>();
}

std::string chat_completions_url(std::string base_url) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  const std::string suffix = "/chat/completions";
  if (base_url.size() >= suffix.size() &&
      base_url.compare(base_url.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return base_url;
  }
  return base_url + suffix;
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

HttpResponse HttpTransport::post(
    const std::string& url,
    const std::vector<std::pair<std::string, std::string>>& headers,
    const std::string& body) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw NetworkError("malformed URL '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body, "application/json");
  if (!res) throw NetworkError("request to " + origin + " failed: " + httplib::to_string(res.error()));
  HttpResponse out;
  out.status = res->status;
  out.body = res->body;
  if (res->has_header("Retry-After")) out.retry_after = res->get_header_value("Retry-After");
  return out;
}

std::string complete(const ChatRequest& request, const EndpointConfig& endpoint,
                     const RetryPolicy& policy, Transport& transport,
                     const Sleeper& sleep) {
  policy.validate();
  const std::string body = encode_chat_request(request);
  const std::vector<std::pair<std::string, std::string>> headers{
      {"Authorization", "Bearer " + endpoint.api_key},
      {"Content-Type", "application/json"},
  };

  BackendError::Failure last;
  for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
    try {
      HttpResponse res;
      try {
        res = transport.post(endpoint.url, headers, body);
      } catch (const NetworkError& e) {
        throw BackendError({BackendError::Kind::kNetwork, 0, std::nullopt, e.what()});
      }
      if (res.status == 429) {
        BackendError::Failure f{BackendError::Kind::kRateLimited, 429, std::nullopt,
                                "rate limited"};
        if (res.retry_after) {
          if (auto secs = parse_decimal(*res.retry_after); secs && *secs >= 0) {
            f.retry_after_seconds = *secs;
          }
        }
        throw BackendError(std::move(f));
      }
      if (res.status < 200 || res.status >= 300) {
        throw BackendError({BackendError::Kind::kHttpStatus, res.status, std::nullopt,
                            res.body.substr(0, 200)});
      }
      return decode_chat_response(res.body);
    } catch (const BackendError& e) {
      last = e.failure();
      if (!policy.should_retry(last)) throw;
      if (attempt + 1 < policy.max_attempts) sleep(policy.delay_for(attempt, last));
    }
  }
  throw BackendError::exhausted(last, policy.max_attempts);
}

ChatClient::ChatClient(EndpointConfig endpoint, RetryPolicy policy,
                       std::shared_ptr<Transport> transport, std::size_t parallelism,
                       Sleeper sleep)
    : endpoint_(std::move(endpoint)),
      policy_(std::move(policy)),
      transport_(std::move(transport)),
      sleep_(std::move(sleep)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(parallelism, 1, 1024))) {
  policy_.validate();
}

std::string ChatClient::complete(const ChatRequest& request) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return lmldap::complete(request, endpoint_, policy_, *transport_, sleep_);
}

}  // namespace lmldap

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

#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <json.hpp>

#include "local_server.hpp"
#include "test_support.hpp"

namespace lmldap {
namespace {

using ::lmldap::testing::chat_reply;
using ::lmldap::testing::FakeTransport;
using ::lmldap::testing::LocalChatServer;
using std::chrono::milliseconds;

ChatRequest hello() {
  ChatRequest r;
  r.model = "m";
  r.messages.push_back({Role::kUser, "hello"});
  return r;
}

struct RecordingSleeper {
  std::vector<milliseconds> delays;
  Sleeper fn() {
    return [this](milliseconds d) { delays.push_back(d); };
  }
};

const EndpointConfig kEndpoint{"http://example.invalid/v1/chat/completions", "sk-test"};

TEST(ChatWireTest, EncodeRequest) {
  ChatRequest r = hello();
  r.temperature = 0.5;
  r.max_output_tokens = 64;
  const auto j = nlohmann::json::parse(encode_chat_request(r));
  EXPECT_EQ(j["model"], "m");
  EXPECT_EQ(j["messages"][0]["role"], "user");
  EXPECT_EQ(j["messages"][0]["content"], "hello");
  EXPECT_EQ(j["temperature"], 0.5);
  EXPECT_EQ(j["max_tokens"], 64);
  EXPECT_FALSE(nlohmann::json::parse(encode_chat_request(hello())).contains("max_tokens"));
  EXPECT_THROW(encode_chat_request(ChatRequest{}), std::invalid_argument);
  r.temperature = -1;
  EXPECT_THROW(encode_chat_request(r), std::invalid_argument);
}

TEST(ChatWireTest, DecodeResponse) {
  EXPECT_EQ(decode_chat_response(chat_reply("hi")), "hi");
  for (const char* bad : {"not json", "{}", "{\"choices\": []}", "{\"choices\": [{}]}",
                          "{\"choices\": [{\"message\": {\"content\": 3}}]}"}) {
    try {
      decode_chat_response(bad);
      ADD_FAILURE() << bad;
    } catch (const BackendError& e) {
      EXPECT_EQ(e.kind(), BackendError::Kind::kProtocol) << bad;
    }
  }
}

TEST(ChatWireTest, CompletionsUrl) {
  EXPECT_EQ(chat_completions_url("https://api.example.com/v1"),
            "https://api.example.com/v1/chat/completions");
  EXPECT_EQ(chat_completions_url("https://api.example.com/v1/"),
            "https://api.example.com/v1/chat/completions");
  EXPECT_EQ(chat_completions_url("https://x/v1/chat/completions"), "https://x/v1/chat/completions");
}

TEST(RetryPolicyTest, DelaysAndClassification) {
  RetryPolicy p;
  p.base_delay = milliseconds(100);
  EXPECT_EQ(p.delay_for(0, {}), milliseconds(100));
  EXPECT_EQ(p.delay_for(2, {}), milliseconds(400));
  BackendError::Failure ra{BackendError::Kind::kRateLimited, 429, 1.5, ""};
  EXPECT_EQ(p.delay_for(0, ra), milliseconds(1500));
  EXPECT_TRUE(p.should_retry({BackendError::Kind::kHttpStatus, 503, {}, ""}));
  EXPECT_FALSE(p.should_retry({BackendError::Kind::kHttpStatus, 400, {}, ""}));
  EXPECT_FALSE(p.should_retry({BackendError::Kind::kProtocol, 200, {}, ""}));
  p.max_attempts = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(CompleteTest, RetriesTransientFailuresThenSucceeds) {
  FakeTransport t;
  t.push({429, "", std::string("0.25")});
  t.push({500, "oops", std::nullopt});
  t.push_reply("done");
  RecordingSleeper sleeper;
  RetryPolicy p;
  p.base_delay = milliseconds(10);
  EXPECT_EQ(complete(hello(), kEndpoint, p, t, sleeper.fn()), "done");
  EXPECT_EQ(t.request_count(), 3u);
  EXPECT_EQ(sleeper.delays, (std::vector<milliseconds>{milliseconds(250), milliseconds(20)}));
  const auto req = t.requests().front();
  EXPECT_EQ(req.url, kEndpoint.url);
  EXPECT_NE(std::find(req.headers.begin(), req.headers.end(),
                      std::make_pair(std::string("Authorization"), std::string("Bearer sk-test"))),
            req.headers.end());
}

TEST(CompleteTest, ExhaustedAfterMaxAttempts) {
  FakeTransport t;
  for (int i = 0; i < 5; ++i) t.push({429, "", std::nullopt});
  RecordingSleeper sleeper;
  try {
    complete(hello(), kEndpoint, RetryPolicy{}, t, sleeper.fn());
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kExhaustedRetries);
    ASSERT_TRUE(e.last());
    EXPECT_EQ(e.last()->kind, BackendError::Kind::kRateLimited);
  }
  EXPECT_EQ(t.request_count(), 3u);
  EXPECT_EQ(sleeper.delays.size(), 2u);
}

TEST(CompleteTest, NonRetryableFailsImmediately) {
  FakeTransport t;
  t.push({401, "unauthorized", std::nullopt});
  try {
    complete(hello(), kEndpoint, RetryPolicy{}, t, RecordingSleeper{}.fn());
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kHttpStatus);
    EXPECT_EQ(e.failure().http_status, 401);
  }
  EXPECT_EQ(t.request_count(), 1u);

  FakeTransport garbled;
  garbled.push({200, "<html>", std::nullopt});
  EXPECT_THROW(complete(hello(), kEndpoint, RetryPolicy{}, garbled, RecordingSleeper{}.fn()),
               BackendError);
  EXPECT_EQ(garbled.request_count(), 1u);
}

TEST(CompleteTest, NetworkErrorsRetry) {
  FakeTransport t;
  t.push_network_error("connection refused");
  t.push_reply("ok");
  EXPECT_EQ(complete(hello(), kEndpoint, RetryPolicy{}, t, RecordingSleeper{}.fn()), "ok");
  EXPECT_EQ(t.request_count(), 2u);
}

class SlowTransport : public Transport {
 public:
  HttpResponse post(const std::string&, const std::vector<std::pair<std::string, std::string>>&,
                    const std::string&) override {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(milliseconds(20));
    --in_flight;
    return {200, chat_reply("x"), std::nullopt};
  }
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
};

TEST(ChatClientTest, BoundsConcurrency) {
  auto transport = std::make_shared<SlowTransport>();
  ChatClient client(kEndpoint, RetryPolicy{}, transport, 2);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { client.complete(hello()); });
  for (auto& th : threads) th.join();
  EXPECT_LE(transport->peak.load(), 2);
  EXPECT_GE(transport->peak.load(), 1);
}

TEST(HttpTransportTest, TalksToALocalServer) {
  LocalChatServer server({{500, std::nullopt}, {429, std::string("0")}}, "pong");
  HttpTransport transport(std::chrono::seconds(5));
  RecordingSleeper sleeper;
  const EndpointConfig endpoint{chat_completions_url(server.base_url()), "sk-local"};
  EXPECT_EQ(complete(hello(), endpoint, RetryPolicy{}, transport, sleeper.fn()), "pong");
  EXPECT_EQ(server.request_count(), 3u);
  EXPECT_EQ(server.authorization_headers().front(), "Bearer sk-local");
  EXPECT_EQ(server.request_paths().front(), "/v1/chat/completions");
  EXPECT_EQ(sleeper.delays.back(), milliseconds(0));
}

TEST(HttpTransportTest, ConnectionRefusedIsNetworkError) {
  int port = 0;
  {
    LocalChatServer server({});
    port = std::stoi(server.base_url().substr(server.base_url().rfind(':') + 1));
  }
  HttpTransport transport(std::chrono::seconds(2));
  EXPECT_THROW(transport.post("http://127.0.0.1:" + std::to_string(port) + "/x", {}, "{}"),
               NetworkError);
  EXPECT_THROW(transport.post("no-scheme", {}, "{}"), NetworkError);
}

}  // namespace
}  // namespace lmldap

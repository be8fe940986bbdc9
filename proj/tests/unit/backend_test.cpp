#include <gtest/gtest.h>

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "mogplan/backend/backend.hpp"
#include "mogplan/core/error.hpp"

using namespace mogplan;
using nlohmann::json;

namespace {

ScriptedRule rule(std::optional<ModelRole> role, std::vector<std::string> contains, std::optional<int> ordinal,
                  std::string response, std::optional<std::string> context = {}) {
  return ScriptedRule{role, std::move(contains), ordinal, std::move(context), std::move(response)};
}

ErrorKind error_of(ModelBackend& backend, const ModelRequest& request) {
  try {
    backend.complete(request);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::NoMatch;
}

// Local chat endpoint that answers with a fixed status sequence, then 200.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(std::vector<int> statuses) : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      const int status = calls_ < static_cast<int>(statuses_.size()) ? statuses_[calls_] : 200;
      ++calls_;
      res.status = status;
      if (status == 200)
        res.set_content(R"x({"choices":[{"message":{"role":"assistant","content":"done()"}}]})x", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int calls() const { return calls_; }
  const std::string& last_auth() const { return last_auth_; }
  const std::string& last_body() const { return last_body_; }

 private:
  httplib::Server server_;
  std::vector<int> statuses_;
  std::thread thread_;
  int port_ = 0;
  int calls_ = 0;
  std::string last_auth_;
  std::string last_body_;
};

RemoteConfig local_config(const std::string& url) {
  return RemoteConfig::from_json({{"base_url", url}, {"model", "test-model"}, {"backoff_ms", 0}, {"timeout_seconds", 5}});
}

}  // namespace

TEST(ScriptedBackend, ReturnsTheFirstMatchingResponseVerbatim) {
  ScriptedBackend backend({rule(ModelRole::Worker, {"Save the file"}, 1, R"(click(element_description="Save"))"),
                           rule(ModelRole::Worker, {}, std::nullopt, "fallback")});
  EXPECT_EQ(backend.complete({ModelRole::Worker, "Subgoal: Save the file", "t@15"}), R"(click(element_description="Save"))");
  EXPECT_EQ(backend.complete({ModelRole::Worker, "Subgoal: Save the file", "t@15"}), "fallback");
}

TEST(ScriptedBackend, OrdinalsCountPerContextAndRole) {
  ScriptedBackend backend({rule(ModelRole::Worker, {}, 1, "first"), rule(ModelRole::Worker, {}, 2, "second"),
                           rule(std::nullopt, {}, std::nullopt, "other")});
  EXPECT_EQ(backend.complete({ModelRole::Worker, "p", "a"}), "first");
  EXPECT_EQ(backend.complete({ModelRole::Manager, "p", "a"}), "other");
  EXPECT_EQ(backend.complete({ModelRole::Worker, "p", "b"}), "first");
  EXPECT_EQ(backend.complete({ModelRole::Worker, "p", "a"}), "second");
  EXPECT_EQ(backend.complete({ModelRole::Worker, "p", "a"}), "other");
}

TEST(ScriptedBackend, ContextMatchesTaskIdAcrossBudgets) {
  ScriptedBackend backend;
  backend.add_rules({rule(ModelRole::Manager, {}, std::nullopt, "1. only here")}, "task_a");
  EXPECT_EQ(backend.complete({ModelRole::Manager, "p", "task_a@15"}), "1. only here");
  EXPECT_EQ(backend.complete({ModelRole::Manager, "p", "task_a"}), "1. only here");
  EXPECT_EQ(error_of(backend, {ModelRole::Manager, "p", "task_b@15"}), ErrorKind::NoRule);
}

TEST(ScriptedBackend, AllSubstringsMustMatch) {
  ScriptedBackend backend({rule(ModelRole::Worker, {"alpha", "beta"}, std::nullopt, "both")});
  EXPECT_EQ(backend.complete({ModelRole::Worker, "beta then alpha", "t"}), "both");
  EXPECT_EQ(error_of(backend, {ModelRole::Worker, "alpha only", "t"}), ErrorKind::NoRule);
}

TEST(ScriptedBackend, UnmatchedCallsStillCountTowardsOrdinals) {
  ScriptedBackend backend({rule(ModelRole::Worker, {}, 2, "second")});
  EXPECT_EQ(error_of(backend, {ModelRole::Worker, "p", "t"}), ErrorKind::NoRule);
  EXPECT_EQ(backend.complete({ModelRole::Worker, "p", "t"}), "second");
}

TEST(ScriptedBackend, SameRequestsGiveSameResponses) {
  auto make = [] {
    return std::make_unique<ScriptedBackend>(std::vector<ScriptedRule>{
        rule(ModelRole::Worker, {}, 1, "a"), rule(ModelRole::Worker, {}, 2, "b"), rule(std::nullopt, {}, {}, "c")});
  };
  auto x = make();
  auto y = make();
  for (int i = 0; i < 5; ++i)
    EXPECT_EQ(x->complete({ModelRole::Worker, "p", "t"}), y->complete({ModelRole::Worker, "p", "t"}));
}

TEST(ScriptedBackend, ConcurrentEpisodesKeepSeparateCounters) {
  ScriptedBackend backend({rule(ModelRole::Worker, {}, 1, "1"), rule(ModelRole::Worker, {}, 2, "2"),
                           rule(ModelRole::Worker, {}, 3, "3")});
  std::vector<std::thread> threads;
  std::vector<std::string> results(8);
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&, t] {
      const std::string ctx = "task" + std::to_string(t);
      for (int i = 0; i < 3; ++i) results[t] += backend.complete({ModelRole::Worker, "p", ctx});
    });
  for (auto& th : threads) th.join();
  for (const auto& r : results) EXPECT_EQ(r, "123");
}

TEST(ScriptedBackend, RuleFilesAreValidated) {
  const auto rules = parse_scripted_rules(json::parse(
      R"x([{"role": "worker", "contains": ["a", "b"], "ordinal": 2, "context": "t", "response": "done()"},
          {"contains": "x", "response": "fail()"}])x"));
  ASSERT_EQ(rules.size(), 2u);
  EXPECT_EQ(rules[0].contains, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(rules[0].ordinal, 2);
  EXPECT_FALSE(rules[1].role.has_value());
  for (const char* bad : {R"({"response": "x"})", R"([{"role": "boss", "response": "x"}])", R"([{"role": "worker"}])",
                          R"([{"ordinal": 0, "response": "x"}])"}) {
    try {
      parse_scripted_rules(json::parse(bad));
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
    }
  }
}

TEST(RemoteBackend, RequestBodyFollowsTheChatShape) {
  auto cfg = local_config("http://127.0.0.1:1");
  cfg.system_prompts[ModelRole::Worker] = "You act.";
  const RemoteBackend backend(cfg);
  const auto body = backend.request_body({ModelRole::Worker, "hello", "t"});
  EXPECT_EQ(body["model"], "test-model");
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1], (json{{"role", "user"}, {"content", "hello"}}));
  EXPECT_EQ(body["temperature"], 0.0);
}

TEST(RemoteBackend, ContentIsExtracted) {
  EXPECT_EQ(RemoteBackend::extract_content(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
  EXPECT_EQ(RemoteBackend::extract_content(
                R"({"choices":[{"message":{"content":[{"type":"text","text":"a"},{"type":"text","text":"b"}]}}]})"),
            "ab");
  try {
    RemoteBackend::extract_content(R"({"error": "nope"})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TransportError);
  }
}

TEST(RemoteBackend, ConfigIsChecked) {
  EXPECT_THROW(RemoteConfig::from_json({{"model", "m"}}), Error);
  EXPECT_THROW(RemoteConfig::from_json({{"base_url", "ftp://x"}, {"model", "m"}}), Error);
  EXPECT_EQ(RemoteConfig::from_json({{"base_url", "http://x"}, {"model", "m"}, {"max_attempts", 9}}).max_attempts, 3);
}

TEST(RemoteBackend, KeyComesFromTheNamedVariable) {
  FakeEndpoint endpoint({});
  auto cfg = local_config(endpoint.url());
  cfg.api_key_env = "MOGPLAN_TEST_KEY_UNSET";
  ::unsetenv("MOGPLAN_TEST_KEY_UNSET");
  EXPECT_THROW(RemoteBackend{cfg}, Error);
  ::setenv("MOGPLAN_TEST_KEY", "sk-test", 1);
  cfg.api_key_env = "MOGPLAN_TEST_KEY";
  RemoteBackend backend(cfg);
  EXPECT_EQ(backend.complete({ModelRole::Worker, "hi", "t"}), "done()");
  EXPECT_EQ(endpoint.last_auth(), "Bearer sk-test");
  EXPECT_EQ(json::parse(endpoint.last_body())["messages"][0]["content"], "hi");
}

TEST(RemoteBackend, RetriesThenSucceeds) {
  FakeEndpoint endpoint({429, 503});
  RemoteBackend backend(local_config(endpoint.url()));
  EXPECT_EQ(backend.complete({ModelRole::Worker, "hi", "t"}), "done()");
  EXPECT_EQ(endpoint.calls(), 3);
}

TEST(RemoteBackend, RateLimitedAfterThreeAttempts) {
  FakeEndpoint endpoint({429, 429, 429, 429});
  RemoteBackend backend(local_config(endpoint.url()));
  EXPECT_EQ(error_of(backend, {ModelRole::Worker, "hi", "t"}), ErrorKind::RateLimited);
  EXPECT_EQ(endpoint.calls(), 3);
}

TEST(RemoteBackend, ClientErrorsAreNotRetried) {
  FakeEndpoint endpoint({401});
  RemoteBackend backend(local_config(endpoint.url()));
  EXPECT_EQ(error_of(backend, {ModelRole::Worker, "hi", "t"}), ErrorKind::TransportError);
  EXPECT_EQ(endpoint.calls(), 1);
}

TEST(RemoteBackend, UnreachableEndpointIsATransportError) {
  auto cfg = local_config("http://127.0.0.1:1");
  cfg.timeout_seconds = 1;
  RemoteBackend backend(cfg);
  EXPECT_EQ(error_of(backend, {ModelRole::Worker, "hi", "t"}), ErrorKind::TransportError);
}

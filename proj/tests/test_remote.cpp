#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "support.hpp"

#include "debatekit/errors.hpp"
#include "debatekit/jsonl.hpp"
#include "debatekit/remote_backend.hpp"

using namespace debatekit;

namespace {

/// In-process chat-completions stub. The handler decides status and body;
/// the stub records every request body, arrival time, and a concurrency
/// high-water mark.
class StubServer {
 public:
  using Handler = std::function<void(const json& body, int call_index, int& status,
                                     json& response)>;

  explicit StubServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      int in_flight = in_flight_.fetch_add(1) + 1;
      int seen = high_water_.load();
      while (in_flight > seen && !high_water_.compare_exchange_weak(seen, in_flight)) {
      }
      int index;
      json body = json::parse(req.body);
      {
        std::lock_guard<std::mutex> lock(mutex_);
        index = static_cast<int>(bodies_.size());
        bodies_.push_back(body);
        arrivals_.push_back(std::chrono::steady_clock::now());
        headers_.push_back(req.get_header_value("Authorization"));
      }
      int status = 200;
      json response;
      handler_(body, index, status, response);
      res.status = status;
      res.set_content(response.is_null() ? "" : response.dump(), "application/json");
      in_flight_.fetch_sub(1);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  int calls() {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<int>(bodies_.size());
  }

  json body(int i) {
    std::lock_guard<std::mutex> lock(mutex_);
    return bodies_.at(static_cast<std::size_t>(i));
  }

  std::string auth_header(int i) {
    std::lock_guard<std::mutex> lock(mutex_);
    return headers_.at(static_cast<std::size_t>(i));
  }

  double span_ms() {
    std::lock_guard<std::mutex> lock(mutex_);
    REQUIRE(arrivals_.size() >= 2);
    return std::chrono::duration<double, std::milli>(arrivals_.back() - arrivals_.front())
        .count();
  }

  int high_water() const { return high_water_.load(); }

 private:
  httplib::Server server_;
  Handler handler_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mutex_;
  std::vector<json> bodies_;
  std::vector<std::chrono::steady_clock::time_point> arrivals_;
  std::vector<std::string> headers_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> high_water_{0};
};

json chat_response(const std::string& content) {
  json doc;
  doc["choices"] = json::array();
  doc["choices"].push_back({{"message", {{"role", "assistant"}, {"content", content}}}});
  return doc;
}

RemoteConfig config_for(const StubServer& server) {
  RemoteConfig config;
  config.base_url = server.base_url();
  config.model = "stub-model";
  config.backoff_base_ms = 40;
  config.timeout_ms = 5000;
  return config;
}

GenerationRequest simple_request(const std::string& text, std::uint64_t seed) {
  GenerationRequest request;
  request.messages.push_back(ChatMessage{Role::user, text});
  request.temperature = 0.7;
  request.max_tokens = 64;
  request.seed = seed;
  return request;
}

}  // namespace

TEST_CASE("remote config validation") {
  RemoteConfig config;
  CHECK_THROWS_AS(config.validate(), ConfigError);  // no base_url
  config.base_url = "http://127.0.0.1:1";
  CHECK_NOTHROW(config.validate());
  config.path = "no-slash";
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.path = "/v1/chat/completions";
  config.max_attempts = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("generate round-trips the wire format") {
  StubServer server([](const json& body, int, int& status, json& response) {
    CHECK(body.at("model") == "stub-model");
    CHECK(body.at("messages").size() == 1);
    CHECK(body.at("messages")[0].at("role") == "user");
    CHECK(body.at("temperature").get<double>() == doctest::Approx(0.7));
    CHECK(body.at("max_tokens") == 64);
    CHECK(body.at("seed") == 99);
    status = 200;
    response = chat_response("Final Answer: Yes.");
  });
  RemoteConfig config = config_for(server);
  config.api_token = "sekrit";
  RemoteBackend backend(config);

  CHECK(backend.id() == "remote:stub-model");
  auto result = backend.generate(simple_request("is it on", 99));
  CHECK(result.text == "Final Answer: Yes.");
  CHECK(result.backend_id == "remote:stub-model");
  CHECK_FALSE(result.token_logprobs.has_value());
  CHECK(server.calls() == 1);
  CHECK(server.auth_header(0) == "Bearer sekrit");
}

TEST_CASE("token logprobs are parsed when present") {
  StubServer server([](const json&, int, int& status, json& response) {
    status = 200;
    response = chat_response("Yes.");
    response["choices"][0]["logprobs"] = {
        {"content", json::array({{{"token", "Yes"}, {"logprob", -0.1}},
                                 {{"token", "."}, {"logprob", -0.05}}})}};
  });
  RemoteConfig config = config_for(server);
  config.request_logprobs = true;
  RemoteBackend backend(config);

  auto result = backend.generate(simple_request("q", 1));
  CHECK(server.body(0).at("logprobs") == true);
  REQUIRE(result.token_logprobs.has_value());
  REQUIRE(result.token_logprobs->size() == 2);
  CHECK((*result.token_logprobs)[0].token == "Yes");
  CHECK((*result.token_logprobs)[1].logprob == doctest::Approx(-0.05));
}

TEST_CASE("scoring posts the target as an assistant turn") {
  StubServer server([](const json& body, int, int& status, json& response) {
    CHECK(body.at("score_target") == true);
    CHECK(body.at("logprobs") == true);
    const auto& messages = body.at("messages");
    CHECK(messages.size() == 2);
    CHECK(messages.back().at("role") == "assistant");
    CHECK(messages.back().at("content") == "The answer is Yes.");
    status = 200;
    response = chat_response("");
    response["choices"][0]["logprobs"] = {
        {"content", json::array({{{"token", "The"}, {"logprob", -0.5}},
                                 {{"token", " answer"}, {"logprob", -0.25}},
                                 {{"token", " is"}, {"logprob", -0.125}},
                                 {{"token", " Yes."}, {"logprob", -0.0625}}})}};
  });
  RemoteBackend backend(config_for(server));
  CHECK(backend.supports_scoring());
  double score = backend.score_sequence({ChatMessage{Role::user, "say yes"}},
                                        "The answer is Yes.");
  CHECK(score == doctest::Approx(-0.9375).epsilon(1e-12));
}

TEST_CASE("scoring without logprobs raises a capability error") {
  StubServer server([](const json&, int, int& status, json& response) {
    status = 200;
    response = chat_response("no logprobs here");
  });
  RemoteBackend backend(config_for(server));
  CHECK_THROWS_AS(
      backend.score_sequence({ChatMessage{Role::user, "say yes"}}, "Yes."),
      CapabilityError);
}

TEST_CASE("transient errors are retried with backoff") {
  SUBCASE("two failures then success") {
    StubServer server([](const json&, int call_index, int& status, json& response) {
      if (call_index < 2) {
        status = 500;
        response = json{{"error", "busy"}};
      } else {
        status = 200;
        response = chat_response("recovered");
      }
    });
    RemoteBackend backend(config_for(server));
    auto result = backend.generate(simple_request("q", 1));
    CHECK(result.text == "recovered");
    CHECK(server.calls() == 3);
    // Backoff before attempt 2 is >= base, before attempt 3 is >= 2 * base.
    CHECK(server.span_ms() >= 0.9 * (3 * 40.0));
  }
  SUBCASE("429 is transient") {
    StubServer server([](const json&, int call_index, int& status, json& response) {
      status = call_index == 0 ? 429 : 200;
      response = call_index == 0 ? json{{"error", "slow down"}} : chat_response("ok");
    });
    RemoteBackend backend(config_for(server));
    CHECK(backend.generate(simple_request("q", 1)).text == "ok");
    CHECK(server.calls() == 2);
  }
  SUBCASE("exhaustion reports the attempt count") {
    StubServer server([](const json&, int, int& status, json& response) {
      status = 503;
      response = json{{"error", "down"}};
    });
    RemoteBackend backend(config_for(server));
    CHECK_THROWS_WITH_AS(backend.generate(simple_request("q", 1)),
                         doctest::Contains("after 3 attempts"), BackendError);
    CHECK(server.calls() == 3);
  }
  SUBCASE("client errors fail immediately") {
    StubServer server([](const json&, int, int& status, json& response) {
      status = 404;
      response = json{{"error", "no such model"}};
    });
    RemoteBackend backend(config_for(server));
    CHECK_THROWS_WITH_AS(backend.generate(simple_request("q", 1)),
                         doctest::Contains("HTTP 404"), BackendError);
    CHECK(server.calls() == 1);
  }
}

TEST_CASE("malformed responses are backend errors") {
  SUBCASE("no choices") {
    StubServer server([](const json&, int, int& status, json& response) {
      status = 200;
      response = json{{"choices", json::array()}};
    });
    RemoteBackend backend(config_for(server));
    CHECK_THROWS_WITH_AS(backend.generate(simple_request("q", 1)),
                         doctest::Contains("no choices"), BackendError);
  }
  SUBCASE("bare string body") {
    StubServer server([](const json&, int, int& status, json& response) {
      status = 200;
      response = json("plain text");
    });
    RemoteBackend backend(config_for(server));
    CHECK_THROWS_AS(backend.generate(simple_request("q", 1)), BackendError);
  }
  SUBCASE("empty body is not JSON") {
    StubServer server([](const json&, int, int& status, json&) { status = 200; });
    RemoteBackend backend(config_for(server));
    CHECK_THROWS_AS(backend.generate(simple_request("q", 1)), BackendError);
  }
}

TEST_CASE("generate_batch against the stub preserves order and the bound") {
  StubServer server([](const json& body, int, int& status, json& response) {
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
    status = 200;
    // Echo the request's seed back in the content.
    response = chat_response("echo " + body.at("seed").dump());
  });
  RemoteBackend backend(config_for(server));

  std::vector<GenerationRequest> requests;
  for (int i = 0; i < 8; ++i)
    requests.push_back(simple_request("q" + std::to_string(i), static_cast<std::uint64_t>(i)));

  auto outcomes = generate_batch(backend, requests, 3);
  REQUIRE(outcomes.size() == 8);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    REQUIRE(outcomes[i].ok());
    CHECK(outcomes[i].result->text == "echo " + std::to_string(i));
  }
  CHECK(server.high_water() <= 3);
  CHECK(server.high_water() >= 2);
}

TEST_CASE("token resolution falls back to the environment") {
  StubServer server([](const json&, int, int& status, json& response) {
    status = 200;
    response = chat_response("ok");
  });
  RemoteConfig config = config_for(server);
  config.token_env = "DEBATEKIT_TEST_TOKEN";
#ifdef _WIN32
  _putenv_s("DEBATEKIT_TEST_TOKEN", "from-env");
#else
  setenv("DEBATEKIT_TEST_TOKEN", "from-env", 1);
#endif
  RemoteBackend backend(config);
  backend.generate(simple_request("q", 1));
  CHECK(server.auth_header(0) == "Bearer from-env");
#ifndef _WIN32
  unsetenv("DEBATEKIT_TEST_TOKEN");
#endif
}

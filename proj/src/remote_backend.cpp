#include "debatekit/remote_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "debatekit/errors.hpp"

namespace debatekit {

namespace {

using nlohmann::ordered_json;

bool transient_status(int status) {
  return status == 408 || status == 429 || (status >= 500 && status < 600);
}

int jitter_ms(int bound) {
  if (bound <= 0) return 0;
  thread_local std::mt19937_64 rng{std::random_device{}()};
  return static_cast<int>(rng() % static_cast<std::uint64_t>(bound + 1));
}

ordered_json request_body(const RemoteConfig& config, const std::vector<ChatMessage>& messages,
                          double temperature, int max_tokens) {
  ordered_json body;
  body["model"] = config.model;
  auto arr = ordered_json::array();
  for (const auto& m : messages)
    arr.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  body["messages"] = std::move(arr);
  body["temperature"] = temperature;
  body["max_tokens"] = max_tokens;
  return body;
}

const ordered_json& first_choice(const ordered_json& doc) {
  if (!doc.contains("choices") || !doc.at("choices").is_array() || doc.at("choices").empty())
    throw BackendError("remote backend: response has no choices");
  return doc.at("choices").at(0);
}

std::optional<std::vector<TokenLogprob>> parse_logprobs(const ordered_json& choice) {
  if (!choice.contains("logprobs") || choice.at("logprobs").is_null()) return std::nullopt;
  const auto& lp = choice.at("logprobs");
  if (!lp.contains("content") || !lp.at("content").is_array()) return std::nullopt;
  std::vector<TokenLogprob> out;
  for (const auto& entry : lp.at("content")) {
    out.push_back(TokenLogprob{entry.at("token").get<std::string>(),
                               entry.at("logprob").get<double>()});
  }
  return out;
}

}  // namespace

void RemoteConfig::validate() const {
  if (base_url.empty()) throw ConfigError("remote backend: base_url is required");
  if (path.empty() || path.front() != '/')
    throw ConfigError("remote backend: path must start with '/'");
  if (max_attempts < 1) throw ConfigError("remote backend: max_attempts must be >= 1");
  if (backoff_base_ms < 0) throw ConfigError("remote backend: backoff_base_ms must be >= 0");
  if (timeout_ms <= 0) throw ConfigError("remote backend: timeout_ms must be positive");
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  config_.validate();
  host_ = config_.base_url;
  resolved_token_ = config_.api_token;
  if (resolved_token_.empty() && !config_.token_env.empty()) {
    if (const char* env = std::getenv(config_.token_env.c_str())) resolved_token_ = env;
  }
}

std::string RemoteBackend::id() const {
  return "remote:" + (config_.model.empty() ? host_ : config_.model);
}

std::string RemoteBackend::post_with_retries(const std::string& body) {
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      int delay = config_.backoff_base_ms * (1 << (attempt - 2)) +
                  jitter_ms(config_.backoff_base_ms / 2);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    httplib::Client client(host_);
    client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));
    if (!resolved_token_.empty()) client.set_bearer_token_auth(resolved_token_);

    auto res = client.Post(config_.path, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = "HTTP " + std::to_string(res->status);
    if (!transient_status(res->status)) {
      throw BackendError("remote backend: request rejected with " + last_error +
                         " (attempt " + std::to_string(attempt) + ")");
    }
  }
  throw BackendError("remote backend: request failed after " +
                     std::to_string(config_.max_attempts) + " attempts (" + last_error + ")");
}

GenerationResult RemoteBackend::generate(const GenerationRequest& request) {
  request.validate();
  ordered_json body =
      request_body(config_, request.messages, request.temperature, request.max_tokens);
  if (request.seed) body["seed"] = *request.seed;
  if (config_.request_logprobs) body["logprobs"] = true;

  ordered_json doc;
  try {
    doc = ordered_json::parse(post_with_retries(body.dump()));
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("remote backend: invalid JSON response: ") + e.what());
  }
  const auto& choice = first_choice(doc);
  if (!choice.contains("message") || !choice.at("message").contains("content") ||
      !choice.at("message").at("content").is_string())
    throw BackendError("remote backend: response lacks message content");
  GenerationResult result;
  result.text = choice.at("message").at("content").get<std::string>();
  result.token_logprobs = parse_logprobs(choice);
  result.backend_id = id();
  return result;
}

double RemoteBackend::score_sequence(const std::vector<ChatMessage>& context,
                                     const std::string& target) {
  if (target.empty()) throw BackendError("score_sequence: empty target");
  auto messages = context;
  messages.push_back(ChatMessage{Role::assistant, target});
  ordered_json body = request_body(config_, messages, 0.0, 1);
  body["score_target"] = true;
  body["logprobs"] = true;

  ordered_json doc;
  try {
    doc = ordered_json::parse(post_with_retries(body.dump()));
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("remote backend: invalid JSON response: ") + e.what());
  }
  auto logprobs = parse_logprobs(first_choice(doc));
  if (!logprobs)
    throw CapabilityError("backend '" + id() + "' returned no logprobs for scoring");
  double total = 0.0;
  for (const auto& t : *logprobs) total += t.logprob;
  return total;
}

}  // namespace debatekit

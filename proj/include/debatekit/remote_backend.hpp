#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "debatekit/backend.hpp"

namespace debatekit {

/// Connection settings for an OpenAI-style chat-completions endpoint.
struct RemoteConfig {
  std::string base_url;  // for example "http://127.0.0.1:8080"
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_token;       // sent as a bearer token when non-empty
  std::string token_env;       // environment variable consulted when api_token is empty
  int max_attempts = 3;        // total tries per request
  int backoff_base_ms = 200;   // delay before retry k is base * 2^(k-1) plus jitter
  int timeout_ms = 30000;
  bool request_logprobs = false;

  void validate() const;
};

/// HTTP client backend. Transient failures (connect errors, HTTP 429/5xx)
/// are retried max_attempts times with exponential backoff; the final error
/// message reports the attempt count. Responses must carry
/// choices[0].message.content; token logprobs are picked up when present.
///
/// Scoring posts the same body shape with the target appended as an assistant
/// message and "score_target": true, and expects logprobs covering exactly
/// the target tokens.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  std::string id() const override;

  GenerationResult generate(const GenerationRequest& request) override;

  bool supports_scoring() const override { return true; }

  double score_sequence(const std::vector<ChatMessage>& context,
                        const std::string& target) override;

 private:
  std::string post_with_retries(const std::string& body);

  RemoteConfig config_;
  std::string host_;
  std::string resolved_token_;
};

}  // namespace debatekit

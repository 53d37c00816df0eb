#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "debatekit/message.hpp"

namespace debatekit {

struct GenerationRequest {
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  int max_tokens = 512;
  /// Optional reproducibility seed; engines always set one so that repeated
  /// runs are byte-identical regardless of scheduling.
  std::optional<std::uint64_t> seed;

  /// Throws BackendError on empty messages, empty content, or out-of-range
  /// sampling parameters.
  void validate() const;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

struct GenerationResult {
  std::string text;
  std::optional<std::vector<TokenLogprob>> token_logprobs;
  std::string backend_id;
};

/// Uniform text-generation interface. Implementations must be safe for
/// concurrent generate() calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string id() const = 0;

  virtual GenerationResult generate(const GenerationRequest& request) = 0;

  virtual bool supports_scoring() const { return false; }

  /// Total log-probability of `target` as an assistant continuation of
  /// `context`. Throws CapabilityError unless supports_scoring().
  virtual double score_sequence(const std::vector<ChatMessage>& context,
                                const std::string& target);
};

/// Outcome slot for one batch item; exactly one of result/error is set.
struct BatchOutcome {
  std::optional<GenerationResult> result;
  std::optional<std::string> error;

  bool ok() const { return result.has_value(); }
};

/// Runs requests with at most `max_in_flight` concurrent generate() calls.
/// Outcomes are positionally aligned with the requests; one failing item
/// reports its error in place without affecting the others.
std::vector<BatchOutcome> generate_batch(Backend& backend,
                                         const std::vector<GenerationRequest>& requests,
                                         int max_in_flight);

}  // namespace debatekit

#pragma once

#include <atomic>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "debatekit/backend.hpp"
#include "debatekit/corpus.hpp"

namespace debatekit {

/// Behavioral knobs of the simulated debate team. The actor answers the
/// initial round correctly with probability p0; afterwards it adopts a
/// disagreeing critic suggestion with probability s (and never moves on
/// agreement). The critic advocates the gold answer with probability c. The
/// marginal per-round transition is therefore
///   P(correct -> incorrect) = (1 - c) * s,   P(incorrect -> correct) = c * s.
/// Guided prompts are followed with probability guided_compliance; adopting a
/// target that contradicts both the current answer and the gold answer is
/// additionally gated by s.
struct ScriptedAgentParams {
  double p0 = 0.5;
  double s = 0.5;
  double c = 0.5;
  double guided_compliance = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic simulator of an actor-critic debate team. Parses the task
/// question, role, guidance, and conversation state out of the prompt text,
/// then draws phrasing and answer transitions from a generator keyed on
/// (params.seed, prompt content, request seed); identical inputs always yield
/// identical outputs, including under concurrency.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend(ScriptedAgentParams params, std::vector<Task> tasks);

  std::string id() const override { return "scripted"; }

  GenerationResult generate(const GenerationRequest& request) override;

  bool supports_scoring() const override { return true; }

  /// Hash-derived pseudo log-probabilities, additive over whitespace tokens.
  /// Override entries installed via set_score / set_token_score take
  /// precedence. Install overrides before concurrent use.
  double score_sequence(const std::vector<ChatMessage>& context,
                        const std::string& target) override;

  void set_score(const std::vector<ChatMessage>& context, const std::string& target,
                 double logprob);

  /// Overrides the score of one whitespace token given everything generated
  /// before it (flattened context plus the target prefix).
  void set_token_score(const std::string& accumulated_context, const std::string& token,
                       double logprob);

 private:
  ScriptedAgentParams params_;
  std::unordered_map<std::string, Task> tasks_by_question_;
  std::unordered_map<std::uint64_t, double> full_scores_;
  std::unordered_map<std::uint64_t, double> token_scores_;
  std::atomic<std::uint64_t> unseeded_ordinal_{0};
};

}  // namespace debatekit

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "debatekit/corpus.hpp"
#include "debatekit/message.hpp"

namespace debatekit {

enum class GuidanceMode { natural, toward, away };

std::string_view to_string(GuidanceMode mode);
GuidanceMode guidance_mode_from_string(std::string_view s);

/// Per-role steering for one debate round. Guided modes carry the answer the
/// role should argue for; natural mode carries none.
struct RoleGuidance {
  GuidanceMode mode = GuidanceMode::natural;
  std::optional<AnswerKey> target;

  static RoleGuidance natural() { return {}; }
  static RoleGuidance toward(AnswerKey key) {
    return {GuidanceMode::toward, std::move(key)};
  }
  static RoleGuidance away(AnswerKey key) { return {GuidanceMode::away, std::move(key)}; }

  bool guided() const { return mode != GuidanceMode::natural; }

  /// Guided guidance must carry a target; natural must not.
  void validate() const;

  friend bool operator==(const RoleGuidance&, const RoleGuidance&) = default;
};

struct PromptTemplate {
  std::string name;  // "<kind>.<slot>", for example "yes_no.single_shot"
  std::string body;
};

/// Named prompt bodies per task kind. Defaults are embedded; a directory of
/// "<kind>.<slot>.txt" files overrides individual entries.
class TemplateSet {
 public:
  static const TemplateSet& builtin();
  static TemplateSet from_directory(const std::filesystem::path& dir);

  /// Slot names: single_shot, single_shot_guided, debate_actor,
  /// debate_actor_guided, debate_critic, debate_critic_guided.
  const std::string& body(TaskKind kind, std::string_view slot) const;

  std::vector<PromptTemplate> all() const;

 private:
  std::map<std::string, std::string> bodies_;
};

/// Previous round's pair of responses, shown to the actor as Person 1/2.
struct PriorExchange {
  std::string actor_text;
  std::string critic_text;
};

/// Builds the actor prompt: single-shot when no prior round exists, debate
/// form otherwise; guided variants add the target-answer wording.
std::vector<ChatMessage> render_actor_prompt(const Task& task,
                                             const std::optional<PriorExchange>& prior,
                                             const RoleGuidance& guidance,
                                             const TemplateSet& templates = TemplateSet::builtin());

/// Builds the critic prompt over the same-round actor response.
std::vector<ChatMessage> render_critic_prompt(
    const Task& task, std::string_view actor_response, const RoleGuidance& guidance,
    const TemplateSet& templates = TemplateSet::builtin());

/// Deterministically picks an incorrect answer: the flipped value for yes/no
/// tasks, a seeded uniform wrong label for choice tasks.
AnswerKey choose_wrong_target(const Task& task, std::uint64_t seed);

}  // namespace debatekit

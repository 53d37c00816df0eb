#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "debatekit/backend.hpp"
#include "debatekit/corpus.hpp"
#include "debatekit/extraction.hpp"
#include "debatekit/jsonl.hpp"
#include "debatekit/prompts.hpp"

namespace debatekit {

/// One actor-critic exchange. The critic always responds to the same-round
/// actor text.
struct RoundRecord {
  int index = 0;
  std::string actor_text;
  std::string critic_text;
  std::optional<AnswerKey> actor_answer;  // extraction result, cached
  RoleGuidance actor_guidance;
  RoleGuidance critic_guidance;
  std::optional<std::vector<ChatMessage>> actor_prompt;   // kept when keep_prompts
  std::optional<std::vector<ChatMessage>> critic_prompt;  // kept when keep_prompts
};

/// Provenance snapshot stored with every trajectory.
struct DebateSnapshot {
  int total_rounds = 5;
  double temperature_debate = 0.7;
  double temperature_rollout = 1.0;
  int max_tokens = 512;
  std::uint64_t seed = 0;
  std::string actor_backend;
  std::string critic_backend;
};

struct Trajectory {
  std::string task_id;
  DebateSnapshot config;
  std::vector<RoundRecord> rounds;

  /// Round indices must run 0..n-1 and must not exceed total_rounds.
  void validate() const;

  bool complete() const {
    return static_cast<int>(rounds.size()) == config.total_rounds;
  }

  std::optional<AnswerKey> final_answer() const {
    return rounds.empty() ? std::nullopt : rounds.back().actor_answer;
  }
};

struct DebateConfig {
  Backend* actor = nullptr;
  Backend* critic = nullptr;
  int total_rounds = 5;
  double temperature_debate = 0.7;
  double temperature_rollout = 1.0;
  int max_tokens = 512;
  std::uint64_t seed = 0;
  bool keep_prompts = false;
  const TemplateSet* templates = nullptr;  // nullptr selects the builtin set

  void validate() const;
  const TemplateSet& template_set() const;
  DebateSnapshot snapshot() const;
};

/// Distinguishes Monte-Carlo rollout generations from main-line rounds; the
/// salt keeps per-call seeds of different rollouts apart.
struct RolloutTag {
  bool rollout = false;
  std::uint64_t salt = 0;
};

/// Runs one exchange on top of `so_far` (actor first, then critic on the
/// actor's response) without mutating the trajectory.
RoundRecord one_debate_round(const Task& task, const Trajectory& so_far,
                             const RoleGuidance& actor_guidance,
                             const RoleGuidance& critic_guidance, const DebateConfig& config,
                             const RolloutTag& tag = {});

/// Full natural debate of config.total_rounds rounds.
Trajectory run_debate(const Task& task, const DebateConfig& config);

/// Completes a partial trajectory with natural rounds at the rollout
/// temperature. The prefix is preserved byte for byte; resuming a complete
/// trajectory is an error.
Trajectory resume_debate(const Task& task, const Trajectory& partial,
                         const DebateConfig& config, std::uint64_t rollout_salt = 0);

/// True when the trajectory's final answer matches the task's key.
bool final_answer_correct(const Task& task, const Trajectory& trajectory);

json trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const json& doc);

void write_trajectories(const std::filesystem::path& file,
                        const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& file);

}  // namespace debatekit

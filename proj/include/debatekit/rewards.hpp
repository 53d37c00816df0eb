#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "debatekit/engine.hpp"
#include "debatekit/scripted_backend.hpp"

namespace debatekit {

/// Monte-Carlo estimate of the probability that a debate paused at some
/// prefix ends with a correct final answer.
struct RewardEstimate {
  double value = 0.0;
  int samples = 0;       // 0 when the prefix was already complete
  double std_error = 0.0;
};

/// Exact final-accuracy probability of the scripted team's two-state chain
/// after `remaining_rounds` more rounds, starting correct or incorrect.
double analytic_convergence_prob(const ScriptedAgentParams& params, bool start_correct,
                                 int remaining_rounds);

/// Estimates the prefix reward with `rollouts` resumed continuations. A
/// complete prefix returns its exact 0/1 outcome with samples = 0. Individual
/// rollout failures are tolerated while at least half complete; the standard
/// error reflects the completed count.
RewardEstimate estimate_final_accuracy(const Task& task, const Trajectory& prefix, int rollouts,
                                       const DebateConfig& config, std::uint64_t salt = 0);

enum class TargetRoles { both, actor_only, critic_only };
enum class Phase { none, critic_phase, actor_phase };

std::string_view to_string(TargetRoles roles);
TargetRoles target_roles_from_string(std::string_view s);
std::string_view to_string(Phase phase);
Phase phase_from_string(std::string_view s);

struct GenerationPlan {
  double epsilon = 0.2;
  int rollouts = 8;
  /// Round indices to probe; empty means every round from 1 to the last.
  std::vector<int> rounds_to_probe;
  TargetRoles target_roles = TargetRoles::both;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<int> resolved_probes(int total_rounds) const;
};

struct BranchCandidate {
  RoundRecord round;
  RewardEstimate reward;
};

/// Natural, toward-gold, and away-from-gold candidate rounds probed at one
/// position, with their estimated rewards (v, v_plus, v_minus).
struct BranchTriple {
  std::string task_id;
  int round_index = 0;
  BranchCandidate natural;
  BranchCandidate toward;
  BranchCandidate away;
  AnswerKey away_target;
  std::vector<ChatMessage> actor_context;   // natural actor prompt at this round
  std::vector<ChatMessage> critic_context;  // critic prompt over the natural actor text
};

/// Generates the three candidate rounds on top of `prefix` and estimates each
/// branch's reward. Which roles receive guidance follows plan.target_roles;
/// an unguided actor branch reuses the natural actor response so the branch
/// isolates the critic's contribution.
BranchTriple probe_round(const Task& task, const Trajectory& prefix, const GenerationPlan& plan,
                         const DebateConfig& config);

enum class PairKind { toward_beats_natural, natural_beats_away };
enum class PairRole { actor, critic };

std::string_view to_string(PairKind kind);
PairKind pair_kind_from_string(std::string_view s);
std::string_view to_string(PairRole role);
PairRole pair_role_from_string(std::string_view s);

struct PreferencePair {
  std::string pair_id;  // "<task_id>#r<round>#<role>"
  std::string task_id;
  int round_index = 0;
  PairRole role = PairRole::actor;
  PairKind kind = PairKind::toward_beats_natural;
  std::vector<ChatMessage> context;
  std::string chosen;
  std::string rejected;
  double v = 0.0;
  double v_plus = 0.0;
  double v_minus = 0.0;
  double delta = 0.0;

  void validate() const;
};

/// Preference selection: a toward branch that beats natural by at least
/// epsilon wins; otherwise a natural branch that beats away by at least
/// epsilon wins; otherwise the probe is discarded. Identical chosen and
/// rejected texts are also discarded.
std::optional<PreferencePair> select_pair(const BranchTriple& triple, double epsilon,
                                          PairRole role);

struct DatasetHeader {
  std::string corpus;
  std::string split;
  Phase phase = Phase::none;
  double epsilon = 0.0;
  int rollouts = 0;
  std::uint64_t seed = 0;
  TargetRoles target_roles = TargetRoles::both;
  std::vector<int> rounds_to_probe;
  int total_rounds = 0;
  std::string actor_backend;
  std::string critic_backend;
  /// Critic pairs reuse the toward/away deltas symmetrically and carry the
  /// natural-actor context; both assumptions are recorded here.
  std::string critic_delta = "symmetric";
  std::string critic_context = "natural_actor";
  int tasks_processed = 0;
  std::vector<std::string> failed_tasks;
};

struct PreferenceDataset {
  DatasetHeader header;
  std::vector<PreferencePair> pairs;
};

/// Runs the guided-probe loop over a corpus: every probed round generates a
/// branch triple, selected pairs are collected, and the main trajectory
/// always advances along the natural branch. Per-task failures are skipped
/// unless they exceed 10% of the corpus. `phase` restricts which role's
/// pairs are emitted (Phase::none emits every targeted role).
PreferenceDataset generate_trajectory_dataset(const Corpus& corpus, const GenerationPlan& plan,
                                              const DebateConfig& config,
                                              Phase phase = Phase::none);

/// Iterative best-response schedule: first a critic-phase dataset (actor
/// fixed), then an actor-phase dataset (critic fixed). Separate configs allow
/// swapping in an updated critic backend between phases.
std::pair<PreferenceDataset, PreferenceDataset> run_best_response_phases(
    const Corpus& corpus, const GenerationPlan& plan, const DebateConfig& critic_phase_config,
    const DebateConfig& actor_phase_config);

void write_dataset(const std::filesystem::path& file, const PreferenceDataset& dataset);
PreferenceDataset read_dataset(const std::filesystem::path& file);

}  // namespace debatekit

#include "debatekit/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "debatekit/errors.hpp"
#include "debatekit/util.hpp"

namespace debatekit {

namespace {

constexpr std::uint64_t kBranchNatural = 1;
constexpr std::uint64_t kBranchToward = 2;
constexpr std::uint64_t kBranchAway = 3;

RewardEstimate branch_reward(const Task& task, const Trajectory& prefix,
                             const RoundRecord& candidate, const GenerationPlan& plan,
                             const DebateConfig& config, std::uint64_t branch_tag) {
  Trajectory extended = prefix;
  extended.rounds.push_back(candidate);
  std::uint64_t salt = mix_seed(plan.seed, mix_seed(branch_tag, candidate.index));
  return estimate_final_accuracy(task, extended, plan.rollouts, config, salt);
}

/// Critic-only branches reuse the natural actor response so the critic's
/// contribution is isolated; otherwise the actor is regenerated under
/// guidance.
RoundRecord guided_candidate(const Task& task, const Trajectory& prefix,
                             const RoundRecord& natural_round, const RoleGuidance& actor_guidance,
                             const RoleGuidance& critic_guidance, const DebateConfig& config) {
  if (actor_guidance.guided()) {
    return one_debate_round(task, prefix, actor_guidance, critic_guidance, config);
  }
  RoundRecord round;
  round.index = natural_round.index;
  round.actor_text = natural_round.actor_text;
  round.actor_answer = natural_round.actor_answer;
  round.actor_guidance = actor_guidance;
  round.critic_guidance = critic_guidance;
  if (natural_round.actor_prompt) round.actor_prompt = natural_round.actor_prompt;

  GenerationRequest critic_request;
  critic_request.messages =
      render_critic_prompt(task, round.actor_text, critic_guidance, config.template_set());
  critic_request.temperature = config.temperature_debate;
  critic_request.max_tokens = config.max_tokens;
  // Guided and natural critic prompts differ in content, which already
  // decorrelates the draws; the seed mirrors one_debate_round's scheme.
  std::uint64_t h = mix_seed(config.seed, fnv1a(task.id));
  h = mix_seed(h, static_cast<std::uint64_t>(round.index));
  h = mix_seed(h, 2);
  h = mix_seed(h, 0);
  critic_request.seed = h;
  round.critic_text = config.critic->generate(critic_request).text;
  if (config.keep_prompts) round.critic_prompt = std::move(critic_request.messages);
  return round;
}

json pair_to_json(const PreferencePair& pair) {
  json doc;
  doc["pair_id"] = pair.pair_id;
  doc["task_id"] = pair.task_id;
  doc["round"] = pair.round_index;
  doc["role"] = std::string(to_string(pair.role));
  doc["kind"] = std::string(to_string(pair.kind));
  json ctx = json::array();
  for (const auto& m : pair.context)
    ctx.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  doc["context"] = std::move(ctx);
  doc["chosen"] = pair.chosen;
  doc["rejected"] = pair.rejected;
  doc["v"] = pair.v;
  doc["v_plus"] = pair.v_plus;
  doc["v_minus"] = pair.v_minus;
  doc["delta"] = pair.delta;
  return doc;
}

PreferencePair pair_from_json(const json& doc) {
  PreferencePair pair;
  pair.pair_id = doc.at("pair_id").get<std::string>();
  pair.task_id = doc.at("task_id").get<std::string>();
  pair.round_index = doc.at("round").get<int>();
  pair.role = pair_role_from_string(doc.at("role").get<std::string>());
  pair.kind = pair_kind_from_string(doc.at("kind").get<std::string>());
  for (const auto& m : doc.at("context"))
    pair.context.push_back(ChatMessage{role_from_string(m.at("role").get<std::string>()),
                                       m.at("content").get<std::string>()});
  pair.chosen = doc.at("chosen").get<std::string>();
  pair.rejected = doc.at("rejected").get<std::string>();
  pair.v = doc.at("v").get<double>();
  pair.v_plus = doc.at("v_plus").get<double>();
  pair.v_minus = doc.at("v_minus").get<double>();
  pair.delta = doc.at("delta").get<double>();
  pair.validate();
  return pair;
}

json header_to_json(const DatasetHeader& header) {
  json doc;
  doc["type"] = "preference_dataset";
  doc["corpus"] = header.corpus;
  doc["split"] = header.split;
  doc["phase"] = std::string(to_string(header.phase));
  doc["epsilon"] = header.epsilon;
  doc["rollouts"] = header.rollouts;
  doc["seed"] = header.seed;
  doc["target_roles"] = std::string(to_string(header.target_roles));
  doc["rounds_to_probe"] = header.rounds_to_probe;
  doc["total_rounds"] = header.total_rounds;
  doc["actor_backend"] = header.actor_backend;
  doc["critic_backend"] = header.critic_backend;
  doc["critic_delta"] = header.critic_delta;
  doc["critic_context"] = header.critic_context;
  doc["tasks_processed"] = header.tasks_processed;
  doc["failed_tasks"] = header.failed_tasks;
  return doc;
}

DatasetHeader header_from_json(const json& doc) {
  if (!doc.contains("type") || doc.at("type") != "preference_dataset")
    throw DatasetError("dataset file does not start with a preference_dataset header");
  DatasetHeader header;
  header.corpus = doc.at("corpus").get<std::string>();
  header.split = doc.at("split").get<std::string>();
  header.phase = phase_from_string(doc.at("phase").get<std::string>());
  header.epsilon = doc.at("epsilon").get<double>();
  header.rollouts = doc.at("rollouts").get<int>();
  header.seed = doc.at("seed").get<std::uint64_t>();
  header.target_roles = target_roles_from_string(doc.at("target_roles").get<std::string>());
  header.rounds_to_probe = doc.at("rounds_to_probe").get<std::vector<int>>();
  header.total_rounds = doc.at("total_rounds").get<int>();
  header.actor_backend = doc.at("actor_backend").get<std::string>();
  header.critic_backend = doc.at("critic_backend").get<std::string>();
  header.critic_delta = doc.at("critic_delta").get<std::string>();
  header.critic_context = doc.at("critic_context").get<std::string>();
  header.tasks_processed = doc.at("tasks_processed").get<int>();
  header.failed_tasks = doc.at("failed_tasks").get<std::vector<std::string>>();
  return header;
}

}  // namespace

double analytic_convergence_prob(const ScriptedAgentParams& params, bool start_correct,
                                 int remaining_rounds) {
  params.validate();
  if (remaining_rounds < 0) throw DatasetError("remaining_rounds must be >= 0");
  const double to_incorrect = (1.0 - params.c) * params.s;
  const double to_correct = params.c * params.s;
  double p = start_correct ? 1.0 : 0.0;
  for (int i = 0; i < remaining_rounds; ++i) {
    p = p * (1.0 - to_incorrect) + (1.0 - p) * to_correct;
  }
  return p;
}

RewardEstimate estimate_final_accuracy(const Task& task, const Trajectory& prefix, int rollouts,
                                       const DebateConfig& config, std::uint64_t salt) {
  if (rollouts < 1) throw DatasetError("rollouts must be >= 1");
  prefix.validate();
  if (prefix.complete()) {
    return RewardEstimate{final_answer_correct(task, prefix) ? 1.0 : 0.0, 0, 0.0};
  }
  int correct = 0;
  int completed = 0;
  std::string last_error;
  for (int k = 0; k < rollouts; ++k) {
    try {
      Trajectory finished = resume_debate(task, prefix, config, mix_seed(salt, k));
      ++completed;
      if (final_answer_correct(task, finished)) ++correct;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (2 * completed < rollouts) {
    throw DatasetError("reward estimate for task " + task.id + " completed only " +
                       std::to_string(completed) + " of " + std::to_string(rollouts) +
                       " rollouts (last error: " + last_error + ")");
  }
  RewardEstimate estimate;
  estimate.samples = completed;
  estimate.value = static_cast<double>(correct) / completed;
  estimate.std_error = std::sqrt(estimate.value * (1.0 - estimate.value) / completed);
  return estimate;
}

std::string_view to_string(TargetRoles roles) {
  switch (roles) {
    case TargetRoles::both: return "both";
    case TargetRoles::actor_only: return "actor_only";
    case TargetRoles::critic_only: return "critic_only";
  }
  return "both";
}

TargetRoles target_roles_from_string(std::string_view s) {
  if (s == "both") return TargetRoles::both;
  if (s == "actor_only") return TargetRoles::actor_only;
  if (s == "critic_only") return TargetRoles::critic_only;
  throw ConfigError("unknown target_roles: " + std::string(s));
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::none: return "none";
    case Phase::critic_phase: return "critic_phase";
    case Phase::actor_phase: return "actor_phase";
  }
  return "none";
}

Phase phase_from_string(std::string_view s) {
  if (s == "none") return Phase::none;
  if (s == "critic_phase") return Phase::critic_phase;
  if (s == "actor_phase") return Phase::actor_phase;
  throw ConfigError("unknown phase: " + std::string(s));
}

std::string_view to_string(PairKind kind) {
  return kind == PairKind::toward_beats_natural ? "toward_beats_natural" : "natural_beats_away";
}

PairKind pair_kind_from_string(std::string_view s) {
  if (s == "toward_beats_natural") return PairKind::toward_beats_natural;
  if (s == "natural_beats_away") return PairKind::natural_beats_away;
  throw DatasetError("unknown pair kind: " + std::string(s));
}

std::string_view to_string(PairRole role) {
  return role == PairRole::actor ? "actor" : "critic";
}

PairRole pair_role_from_string(std::string_view s) {
  if (s == "actor") return PairRole::actor;
  if (s == "critic") return PairRole::critic;
  throw DatasetError("unknown pair role: " + std::string(s));
}

void GenerationPlan::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (rollouts < 1) throw ConfigError("rollouts must be >= 1");
  for (int r : rounds_to_probe) {
    if (r < 0) throw ConfigError("rounds_to_probe entries must be >= 0");
  }
}

std::vector<int> GenerationPlan::resolved_probes(int total_rounds) const {
  std::vector<int> probes = rounds_to_probe;
  if (probes.empty()) {
    for (int t = 1; t < total_rounds; ++t) probes.push_back(t);
    return probes;
  }
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  for (int r : probes) {
    if (r >= total_rounds)
      throw ConfigError("rounds_to_probe entry " + std::to_string(r) +
                        " exceeds the last round index");
  }
  return probes;
}

void PreferencePair::validate() const {
  if (chosen == rejected) throw DatasetError("pair " + pair_id + ": chosen equals rejected");
  if (chosen.empty() || rejected.empty())
    throw DatasetError("pair " + pair_id + ": empty response text");
  if (delta < 0) throw DatasetError("pair " + pair_id + ": negative delta");
  if (context.empty()) throw DatasetError("pair " + pair_id + ": empty context");
}

BranchTriple probe_round(const Task& task, const Trajectory& prefix, const GenerationPlan& plan,
                         const DebateConfig& config) {
  plan.validate();
  config.validate();
  task.validate();

  BranchTriple triple;
  triple.task_id = task.id;
  triple.round_index = static_cast<int>(prefix.rounds.size());
  triple.away_target = choose_wrong_target(task, plan.seed);

  const bool guide_actor = plan.target_roles != TargetRoles::critic_only;
  const bool guide_critic = plan.target_roles != TargetRoles::actor_only;

  triple.natural.round = one_debate_round(task, prefix, RoleGuidance::natural(),
                                          RoleGuidance::natural(), config);

  auto guidance_for = [](bool guided, GuidanceMode mode, const AnswerKey& target) {
    RoleGuidance g;
    if (guided) {
      g.mode = mode;
      g.target = target;
    }
    return g;
  };
  triple.toward.round = guided_candidate(
      task, prefix, triple.natural.round,
      guidance_for(guide_actor, GuidanceMode::toward, task.answer),
      guidance_for(guide_critic, GuidanceMode::toward, task.answer), config);
  triple.away.round = guided_candidate(
      task, prefix, triple.natural.round,
      guidance_for(guide_actor, GuidanceMode::away, triple.away_target),
      guidance_for(guide_critic, GuidanceMode::away, triple.away_target), config);

  triple.natural.reward =
      branch_reward(task, prefix, triple.natural.round, plan, config, kBranchNatural);
  triple.toward.reward =
      branch_reward(task, prefix, triple.toward.round, plan, config, kBranchToward);
  triple.away.reward = branch_reward(task, prefix, triple.away.round, plan, config, kBranchAway);

  std::optional<PriorExchange> prior;
  if (!prefix.rounds.empty()) {
    prior = PriorExchange{prefix.rounds.back().actor_text, prefix.rounds.back().critic_text};
  }
  triple.actor_context =
      render_actor_prompt(task, prior, RoleGuidance::natural(), config.template_set());
  triple.critic_context = render_critic_prompt(task, triple.natural.round.actor_text,
                                               RoleGuidance::natural(), config.template_set());
  return triple;
}

std::optional<PreferencePair> select_pair(const BranchTriple& triple, double epsilon,
                                          PairRole role) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  auto text_of = [&](const BranchCandidate& candidate) -> const std::string& {
    return role == PairRole::actor ? candidate.round.actor_text : candidate.round.critic_text;
  };

  PreferencePair pair;
  pair.task_id = triple.task_id;
  pair.round_index = triple.round_index;
  pair.role = role;
  pair.v = triple.natural.reward.value;
  pair.v_plus = triple.toward.reward.value;
  pair.v_minus = triple.away.reward.value;
  pair.context = role == PairRole::actor ? triple.actor_context : triple.critic_context;
  pair.pair_id = triple.task_id + "#r" + std::to_string(triple.round_index) + "#" +
                 std::string(to_string(role));

  const double delta_plus = pair.v_plus - pair.v;
  const double delta_minus = pair.v - pair.v_minus;
  if (delta_plus >= epsilon) {
    pair.kind = PairKind::toward_beats_natural;
    pair.chosen = text_of(triple.toward);
    pair.rejected = text_of(triple.natural);
    pair.delta = delta_plus;
  } else if (delta_minus >= epsilon) {
    pair.kind = PairKind::natural_beats_away;
    pair.chosen = text_of(triple.natural);
    pair.rejected = text_of(triple.away);
    pair.delta = delta_minus;
  } else {
    return std::nullopt;
  }
  if (pair.chosen == pair.rejected) return std::nullopt;
  pair.validate();
  return pair;
}

PreferenceDataset generate_trajectory_dataset(const Corpus& corpus, const GenerationPlan& plan,
                                              const DebateConfig& config, Phase phase) {
  plan.validate();
  config.validate();
  if (phase == Phase::critic_phase && plan.target_roles == TargetRoles::actor_only)
    throw ConfigError("critic_phase requires critic-targeted probes");
  if (phase == Phase::actor_phase && plan.target_roles == TargetRoles::critic_only)
    throw ConfigError("actor_phase requires actor-targeted probes");

  std::vector<PairRole> emit_roles;
  if (phase == Phase::critic_phase) {
    emit_roles = {PairRole::critic};
  } else if (phase == Phase::actor_phase) {
    emit_roles = {PairRole::actor};
  } else {
    if (plan.target_roles != TargetRoles::critic_only) emit_roles.push_back(PairRole::actor);
    if (plan.target_roles != TargetRoles::actor_only) emit_roles.push_back(PairRole::critic);
  }

  PreferenceDataset dataset;
  dataset.header.corpus = corpus.name;
  dataset.header.split = corpus.split;
  dataset.header.phase = phase;
  dataset.header.epsilon = plan.epsilon;
  dataset.header.rollouts = plan.rollouts;
  dataset.header.seed = plan.seed;
  dataset.header.target_roles = plan.target_roles;
  dataset.header.rounds_to_probe = plan.resolved_probes(config.total_rounds);
  dataset.header.total_rounds = config.total_rounds;
  dataset.header.actor_backend = config.actor->id();
  dataset.header.critic_backend = config.critic->id();
  dataset.header.tasks_processed = static_cast<int>(corpus.tasks.size());

  const std::set<int> probes(dataset.header.rounds_to_probe.begin(),
                             dataset.header.rounds_to_probe.end());

  for (const auto& task : corpus.tasks) {
    try {
      Trajectory trajectory;
      trajectory.task_id = task.id;
      trajectory.config = config.snapshot();
      for (int t = 0; t < config.total_rounds; ++t) {
        if (probes.contains(t)) {
          BranchTriple triple = probe_round(task, trajectory, plan, config);
          for (PairRole role : emit_roles) {
            if (auto pair = select_pair(triple, plan.epsilon, role))
              dataset.pairs.push_back(std::move(*pair));
          }
          trajectory.rounds.push_back(triple.natural.round);
        } else {
          trajectory.rounds.push_back(one_debate_round(task, trajectory, RoleGuidance::natural(),
                                                       RoleGuidance::natural(), config));
        }
      }
    } catch (const Error& e) {
      dataset.header.failed_tasks.push_back(task.id + ": " + e.what());
    }
  }

  if (dataset.header.failed_tasks.size() * 10 > corpus.tasks.size()) {
    throw DatasetError("dataset generation failed on " +
                       std::to_string(dataset.header.failed_tasks.size()) + " of " +
                       std::to_string(corpus.tasks.size()) + " tasks");
  }
  return dataset;
}

std::pair<PreferenceDataset, PreferenceDataset> run_best_response_phases(
    const Corpus& corpus, const GenerationPlan& plan, const DebateConfig& critic_phase_config,
    const DebateConfig& actor_phase_config) {
  PreferenceDataset critic_ds =
      generate_trajectory_dataset(corpus, plan, critic_phase_config, Phase::critic_phase);
  PreferenceDataset actor_ds =
      generate_trajectory_dataset(corpus, plan, actor_phase_config, Phase::actor_phase);
  return {std::move(critic_ds), std::move(actor_ds)};
}

void write_dataset(const std::filesystem::path& file, const PreferenceDataset& dataset) {
  std::vector<json> lines;
  lines.reserve(dataset.pairs.size() + 1);
  lines.push_back(header_to_json(dataset.header));
  for (const auto& pair : dataset.pairs) lines.push_back(pair_to_json(pair));
  write_jsonl(file, lines);
}

PreferenceDataset read_dataset(const std::filesystem::path& file) {
  PreferenceDataset dataset;
  bool have_header = false;
  try {
    for_each_jsonl(file, [&](std::size_t, const json& doc) {
      if (!have_header) {
        dataset.header = header_from_json(doc);
        have_header = true;
        return;
      }
      dataset.pairs.push_back(pair_from_json(doc));
    });
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(file.string() + ": malformed dataset: " + e.what());
  }
  if (!have_header) throw DatasetError(file.string() + ": missing dataset header");
  return dataset;
}

}  // namespace debatekit

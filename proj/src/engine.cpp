#include "debatekit/engine.hpp"

#include "debatekit/errors.hpp"
#include "debatekit/util.hpp"

namespace debatekit {

namespace {

/// Per-call seed: a pure function of run seed, task, round, role, and rollout
/// salt, so reruns and concurrent schedules reproduce identical requests.
std::uint64_t call_seed(const DebateConfig& config, const Task& task, int round_index,
                        bool critic, const RolloutTag& tag) {
  std::uint64_t h = mix_seed(config.seed, fnv1a(task.id));
  h = mix_seed(h, static_cast<std::uint64_t>(round_index));
  h = mix_seed(h, critic ? 2 : 1);
  h = mix_seed(h, tag.salt);
  return h;
}

json guidance_to_json(const RoleGuidance& guidance) {
  json doc;
  doc["mode"] = std::string(to_string(guidance.mode));
  if (guidance.target) doc["target"] = guidance.target->value;
  return doc;
}

RoleGuidance guidance_from_json(const json& doc) {
  RoleGuidance g;
  g.mode = guidance_mode_from_string(doc.at("mode").get<std::string>());
  if (doc.contains("target")) g.target = AnswerKey{doc.at("target").get<std::string>()};
  g.validate();
  return g;
}

json messages_to_json(const std::vector<ChatMessage>& messages) {
  json arr = json::array();
  for (const auto& m : messages)
    arr.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  return arr;
}

std::vector<ChatMessage> messages_from_json(const json& arr) {
  std::vector<ChatMessage> out;
  for (const auto& m : arr)
    out.push_back(ChatMessage{role_from_string(m.at("role").get<std::string>()),
                              m.at("content").get<std::string>()});
  return out;
}

}  // namespace

void Trajectory::validate() const {
  if (task_id.empty()) throw EngineError("trajectory has empty task_id");
  if (config.total_rounds < 1) throw EngineError("trajectory total_rounds must be >= 1");
  if (static_cast<int>(rounds.size()) > config.total_rounds)
    throw EngineError("trajectory " + task_id + " has more rounds than total_rounds");
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    if (rounds[i].index != static_cast<int>(i))
      throw EngineError("trajectory " + task_id + " has non-contiguous round indices");
  }
}

void DebateConfig::validate() const {
  if (!actor || !critic) throw EngineError("debate config needs actor and critic backends");
  if (total_rounds < 1) throw EngineError("total_rounds must be >= 1");
  if (max_tokens < 1) throw EngineError("max_tokens must be >= 1");
  for (double t : {temperature_debate, temperature_rollout}) {
    if (!(t >= 0.0) || t > 2.0) throw EngineError("temperature must be in [0, 2]");
  }
}

const TemplateSet& DebateConfig::template_set() const {
  return templates ? *templates : TemplateSet::builtin();
}

DebateSnapshot DebateConfig::snapshot() const {
  DebateSnapshot snap;
  snap.total_rounds = total_rounds;
  snap.temperature_debate = temperature_debate;
  snap.temperature_rollout = temperature_rollout;
  snap.max_tokens = max_tokens;
  snap.seed = seed;
  snap.actor_backend = actor ? actor->id() : "";
  snap.critic_backend = critic ? critic->id() : "";
  return snap;
}

RoundRecord one_debate_round(const Task& task, const Trajectory& so_far,
                             const RoleGuidance& actor_guidance,
                             const RoleGuidance& critic_guidance, const DebateConfig& config,
                             const RolloutTag& tag) {
  config.validate();
  task.validate();
  so_far.validate();
  const int index = static_cast<int>(so_far.rounds.size());
  if (index >= config.total_rounds)
    throw EngineError("debate for task " + task.id + " already has all rounds");

  std::optional<PriorExchange> prior;
  if (!so_far.rounds.empty()) {
    // The actor only sees the immediately preceding exchange.
    const auto& last = so_far.rounds.back();
    prior = PriorExchange{last.actor_text, last.critic_text};
  }
  const double temperature = tag.rollout ? config.temperature_rollout : config.temperature_debate;

  RoundRecord round;
  round.index = index;
  round.actor_guidance = actor_guidance;
  round.critic_guidance = critic_guidance;

  GenerationRequest actor_request;
  actor_request.messages = render_actor_prompt(task, prior, actor_guidance, config.template_set());
  actor_request.temperature = temperature;
  actor_request.max_tokens = config.max_tokens;
  actor_request.seed = call_seed(config, task, index, /*critic=*/false, tag);
  round.actor_text = config.actor->generate(actor_request).text;
  round.actor_answer = extract_answer(round.actor_text, answer_kind(task.kind));

  GenerationRequest critic_request;
  critic_request.messages =
      render_critic_prompt(task, round.actor_text, critic_guidance, config.template_set());
  critic_request.temperature = temperature;
  critic_request.max_tokens = config.max_tokens;
  critic_request.seed = call_seed(config, task, index, /*critic=*/true, tag);
  round.critic_text = config.critic->generate(critic_request).text;

  if (config.keep_prompts) {
    round.actor_prompt = std::move(actor_request.messages);
    round.critic_prompt = std::move(critic_request.messages);
  }
  return round;
}

Trajectory run_debate(const Task& task, const DebateConfig& config) {
  config.validate();
  task.validate();
  Trajectory trajectory;
  trajectory.task_id = task.id;
  trajectory.config = config.snapshot();
  for (int t = 0; t < config.total_rounds; ++t) {
    trajectory.rounds.push_back(one_debate_round(task, trajectory, RoleGuidance::natural(),
                                                 RoleGuidance::natural(), config));
  }
  return trajectory;
}

Trajectory resume_debate(const Task& task, const Trajectory& partial, const DebateConfig& config,
                         std::uint64_t rollout_salt) {
  config.validate();
  task.validate();
  partial.validate();
  if (partial.task_id != task.id)
    throw EngineError("resume_debate: trajectory belongs to task " + partial.task_id +
                      ", not " + task.id);
  if (partial.rounds.empty())
    throw EngineError("resume_debate: empty prefix; use run_debate instead");
  if (static_cast<int>(partial.rounds.size()) >= config.total_rounds)
    throw EngineError("resume_debate: trajectory for task " + task.id + " is already complete");

  Trajectory trajectory = partial;
  trajectory.config = config.snapshot();
  RolloutTag tag{true, rollout_salt};
  while (static_cast<int>(trajectory.rounds.size()) < config.total_rounds) {
    trajectory.rounds.push_back(one_debate_round(task, trajectory, RoleGuidance::natural(),
                                                 RoleGuidance::natural(), config, tag));
  }
  return trajectory;
}

bool final_answer_correct(const Task& task, const Trajectory& trajectory) {
  auto answer = trajectory.final_answer();
  return answer && *answer == task.answer;
}

json trajectory_to_json(const Trajectory& trajectory) {
  json doc;
  doc["task_id"] = trajectory.task_id;
  json cfg;
  cfg["total_rounds"] = trajectory.config.total_rounds;
  cfg["temperature_debate"] = trajectory.config.temperature_debate;
  cfg["temperature_rollout"] = trajectory.config.temperature_rollout;
  cfg["max_tokens"] = trajectory.config.max_tokens;
  cfg["seed"] = trajectory.config.seed;
  cfg["actor_backend"] = trajectory.config.actor_backend;
  cfg["critic_backend"] = trajectory.config.critic_backend;
  doc["config"] = std::move(cfg);
  json rounds = json::array();
  for (const auto& r : trajectory.rounds) {
    json rd;
    rd["index"] = r.index;
    rd["actor_text"] = r.actor_text;
    rd["critic_text"] = r.critic_text;
    rd["actor_answer"] = r.actor_answer ? json(r.actor_answer->value) : json(nullptr);
    rd["actor_guidance"] = guidance_to_json(r.actor_guidance);
    rd["critic_guidance"] = guidance_to_json(r.critic_guidance);
    if (r.actor_prompt) rd["actor_prompt"] = messages_to_json(*r.actor_prompt);
    if (r.critic_prompt) rd["critic_prompt"] = messages_to_json(*r.critic_prompt);
    rounds.push_back(std::move(rd));
  }
  doc["rounds"] = std::move(rounds);
  return doc;
}

Trajectory trajectory_from_json(const json& doc) {
  Trajectory trajectory;
  try {
    trajectory.task_id = doc.at("task_id").get<std::string>();
    const auto& cfg = doc.at("config");
    trajectory.config.total_rounds = cfg.at("total_rounds").get<int>();
    trajectory.config.temperature_debate = cfg.at("temperature_debate").get<double>();
    trajectory.config.temperature_rollout = cfg.at("temperature_rollout").get<double>();
    trajectory.config.max_tokens = cfg.at("max_tokens").get<int>();
    trajectory.config.seed = cfg.at("seed").get<std::uint64_t>();
    trajectory.config.actor_backend = cfg.at("actor_backend").get<std::string>();
    trajectory.config.critic_backend = cfg.at("critic_backend").get<std::string>();
    for (const auto& rd : doc.at("rounds")) {
      RoundRecord r;
      r.index = rd.at("index").get<int>();
      r.actor_text = rd.at("actor_text").get<std::string>();
      r.critic_text = rd.at("critic_text").get<std::string>();
      if (!rd.at("actor_answer").is_null())
        r.actor_answer = AnswerKey{rd.at("actor_answer").get<std::string>()};
      r.actor_guidance = guidance_from_json(rd.at("actor_guidance"));
      r.critic_guidance = guidance_from_json(rd.at("critic_guidance"));
      if (rd.contains("actor_prompt")) r.actor_prompt = messages_from_json(rd.at("actor_prompt"));
      if (rd.contains("critic_prompt"))
        r.critic_prompt = messages_from_json(rd.at("critic_prompt"));
      trajectory.rounds.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw EngineError(std::string("malformed trajectory record: ") + e.what());
  }
  trajectory.validate();
  return trajectory;
}

void write_trajectories(const std::filesystem::path& file,
                        const std::vector<Trajectory>& trajectories) {
  std::vector<json> lines;
  lines.reserve(trajectories.size());
  for (const auto& t : trajectories) lines.push_back(trajectory_to_json(t));
  write_jsonl(file, lines);
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& file) {
  std::vector<Trajectory> out;
  for_each_jsonl(file, [&](std::size_t, const json& doc) {
    out.push_back(trajectory_from_json(doc));
  });
  return out;
}

}  // namespace debatekit

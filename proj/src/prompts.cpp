#include "debatekit/prompts.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "debatekit/errors.hpp"
#include "debatekit/util.hpp"

namespace debatekit {

namespace {

constexpr std::array<std::string_view, 6> kSlots = {
    "single_shot",  "single_shot_guided",  "debate_actor",
    "debate_actor_guided", "debate_critic", "debate_critic_guided",
};

constexpr std::string_view kYesNoSingleShot =
    "You will be given a yes-no question which is based on a passage. You should use the "
    "passage to help you answer the question. You should give a brief justification for your "
    "answer, and you must provide a final answer of either Yes or No.\nQuestion: "
    "{question}?\nPassage: {passage}";

constexpr std::string_view kYesNoSingleShotGuided =
    "You will be given a yes-no question which is based on a passage. You should use the "
    "passage to help you answer the question with a {target_answer}. You should give a brief "
    "justification for your answer of {target_answer}, and you must state that your final "
    "answer is {target_answer}.\nQuestion: {question}?\nPassage: {passage}";

constexpr std::string_view kYesNoDebateActor =
    "Several people have provided answers to a yes-no question. Below are their "
    "responses:\nPerson 1 said: {responses[1]}\nPerson 2 said: {responses[2]}\n\nYou should "
    "take these answers into consideration when answering the following yes-no question, "
    "which is based on a passage. You should give a brief justification for your answer, and "
    "you must provide a final answer of either Yes or No.\nQuestion: {question}\nPassage: "
    "{passage}";

constexpr std::string_view kYesNoDebateActorGuided =
    "Several people have provided answers to a yes-no question. Below are their "
    "responses:\nPerson 1 said: {responses[1]}\nPerson 2 said: {responses[2]}You should take "
    "these answers and the passage into consideration when answering the following question "
    "with {target_answer}. You should give a brief justification for your answer of "
    "{target_answer}, and you must state that your final answer is {target_answer}.\nQuestion: "
    "{question}\nPassage: {passage}";

constexpr std::string_view kYesNoDebateCritic =
    "I am answering a question based on a passage. I would like you to help me improve the "
    "correctness of my response by briefly providing some additional details my original "
    "response may have missed. \nQuestion: {question}\nPassage: {passage}\nMy Response: "
    "{actor_response}";

constexpr std::string_view kYesNoDebateCriticGuided =
    "I would like you to be a debate assistant. You will be given a question based on a "
    "passage and my response to the question. You should use the passage and my response to "
    "develop additional details for why the correct answer is {target_answer}. Your details "
    "must be brief and must support the fact that the correct answer is "
    "{target_answer}.\nQuestion: {question}?\nPassage: {passage}\nMy Response: {actor_response}";

std::string key_of(TaskKind kind, std::string_view slot) {
  return std::string(to_string(kind)) + "." + std::string(slot);
}

/// Choice-task bodies are derived from the yes/no family: question type and
/// final-answer wording change, and a Choices line follows the question line.
std::string derive_multi_choice(std::string body) {
  body = replace_all(std::move(body), "yes-no question", "multiple-choice question");
  body = replace_all(std::move(body), "you must provide a final answer of either Yes or No.",
                     "you must provide a final answer as one of the choice letters.");
  for (std::string_view q : {"\nQuestion: {question}?", "\nQuestion: {question}"}) {
    auto pos = body.find(q);
    if (pos != std::string::npos) {
      body.insert(pos + q.size(), "\nChoices:{choices}");
      break;
    }
  }
  return body;
}

std::string strip_one_trailing_newline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string fill(std::string body, std::string_view placeholder, std::string_view value) {
  return replace_all(std::move(body), placeholder, value);
}

std::string question_text(const Task& task) {
  std::string q = trim(task.question);
  while (!q.empty() && q.back() == '?') {
    q.pop_back();
    q = trim(q);
  }
  return q;
}

std::string choices_text(const Task& task) {
  std::string out;
  for (const auto& c : task.choices) out += "\n(" + c.label + ") " + c.text;
  return out;
}

void check_resolved(const std::string& text, std::string_view slot) {
  static constexpr std::array<std::string_view, 7> kPlaceholders = {
      "{question}",      "{passage}",       "{choices}",       "{target_answer}",
      "{responses[1]}",  "{responses[2]}",  "{actor_response}",
  };
  for (auto p : kPlaceholders) {
    if (text.find(p) != std::string::npos)
      throw TemplateError("template '" + std::string(slot) + "' left placeholder " +
                          std::string(p) + " unresolved");
  }
}

void validate_target(const Task& task, const RoleGuidance& guidance) {
  if (!guidance.guided()) return;
  const AnswerKey& target = *guidance.target;
  if (task.kind == TaskKind::yes_no) {
    if (target.value != "yes" && target.value != "no")
      throw TemplateError("guidance target '" + target.value + "' is not a yes/no answer");
    return;
  }
  for (const auto& c : task.choices) {
    if (c.label == target.value) return;
  }
  throw TemplateError("guidance target '" + target.value + "' is not a choice of task " +
                      task.id);
}

std::vector<ChatMessage> finish(std::string body, const Task& task,
                                const RoleGuidance& guidance, std::string_view slot) {
  if (task.passage.empty()) {
    auto pos = body.find("\nPassage: {passage}");
    if (pos != std::string::npos) body.erase(pos, std::string_view("\nPassage: {passage}").size());
  }
  body = fill(std::move(body), "{question}", question_text(task));
  body = fill(std::move(body), "{passage}", task.passage);
  if (task.kind == TaskKind::multi_choice)
    body = fill(std::move(body), "{choices}", choices_text(task));
  if (guidance.guided())
    body = fill(std::move(body), "{target_answer}",
                display_answer(*guidance.target, answer_kind(task.kind)));
  check_resolved(body, slot);
  return {ChatMessage{Role::user, std::move(body)}};
}

}  // namespace

std::string_view to_string(GuidanceMode mode) {
  switch (mode) {
    case GuidanceMode::natural: return "natural";
    case GuidanceMode::toward: return "toward";
    case GuidanceMode::away: return "away";
  }
  return "natural";
}

GuidanceMode guidance_mode_from_string(std::string_view s) {
  if (s == "natural") return GuidanceMode::natural;
  if (s == "toward") return GuidanceMode::toward;
  if (s == "away") return GuidanceMode::away;
  throw Error("unknown guidance mode: " + std::string(s));
}

void RoleGuidance::validate() const {
  if (guided() && !target)
    throw TemplateError("guided guidance requires a target answer");
  if (!guided() && target)
    throw TemplateError("natural guidance must not carry a target answer");
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = [] {
    TemplateSet s;
    const std::array<std::string_view, 6> bodies = {
        kYesNoSingleShot,  kYesNoSingleShotGuided,  kYesNoDebateActor,
        kYesNoDebateActorGuided, kYesNoDebateCritic, kYesNoDebateCriticGuided,
    };
    for (std::size_t i = 0; i < kSlots.size(); ++i) {
      s.bodies_[key_of(TaskKind::yes_no, kSlots[i])] = std::string(bodies[i]);
      s.bodies_[key_of(TaskKind::multi_choice, kSlots[i])] =
          derive_multi_choice(std::string(bodies[i]));
    }
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw TemplateError("template directory not found: " + dir.string());
  TemplateSet set = builtin();
  for (TaskKind kind : {TaskKind::yes_no, TaskKind::multi_choice}) {
    for (auto slot : kSlots) {
      auto file = dir / (key_of(kind, slot) + ".txt");
      if (!std::filesystem::exists(file)) continue;
      std::ifstream in(file);
      if (!in) throw TemplateError("cannot read template file " + file.string());
      std::ostringstream buf;
      buf << in.rdbuf();
      set.bodies_[key_of(kind, slot)] = strip_one_trailing_newline(buf.str());
    }
  }
  return set;
}

const std::string& TemplateSet::body(TaskKind kind, std::string_view slot) const {
  auto it = bodies_.find(key_of(kind, slot));
  if (it == bodies_.end())
    throw TemplateError("unknown template slot '" + std::string(slot) + "'");
  return it->second;
}

std::vector<PromptTemplate> TemplateSet::all() const {
  std::vector<PromptTemplate> out;
  out.reserve(bodies_.size());
  for (const auto& [name, body] : bodies_) out.push_back(PromptTemplate{name, body});
  return out;
}

std::vector<ChatMessage> render_actor_prompt(const Task& task,
                                             const std::optional<PriorExchange>& prior,
                                             const RoleGuidance& guidance,
                                             const TemplateSet& templates) {
  task.validate();
  guidance.validate();
  validate_target(task, guidance);
  std::string_view slot;
  if (prior) {
    slot = guidance.guided() ? "debate_actor_guided" : "debate_actor";
  } else {
    slot = guidance.guided() ? "single_shot_guided" : "single_shot";
  }
  std::string body = templates.body(task.kind, slot);
  if (prior) {
    body = fill(std::move(body), "{responses[1]}", prior->actor_text);
    body = fill(std::move(body), "{responses[2]}", prior->critic_text);
  }
  return finish(std::move(body), task, guidance, slot);
}

std::vector<ChatMessage> render_critic_prompt(const Task& task, std::string_view actor_response,
                                              const RoleGuidance& guidance,
                                              const TemplateSet& templates) {
  task.validate();
  guidance.validate();
  validate_target(task, guidance);
  std::string_view slot = guidance.guided() ? "debate_critic_guided" : "debate_critic";
  std::string body = templates.body(task.kind, slot);
  body = fill(std::move(body), "{actor_response}", actor_response);
  return finish(std::move(body), task, guidance, slot);
}

AnswerKey choose_wrong_target(const Task& task, std::uint64_t seed) {
  task.validate();
  if (task.kind == TaskKind::yes_no)
    return AnswerKey{task.answer.value == "yes" ? "no" : "yes"};
  std::vector<std::string> wrong;
  for (const auto& c : task.choices) {
    if (c.label != task.answer.value) wrong.push_back(c.label);
  }
  auto pick = splitmix64(mix_seed(seed, fnv1a(task.id))) % wrong.size();
  return AnswerKey{wrong[pick]};
}

}  // namespace debatekit

#include "debatekit/scripted_backend.hpp"

#include <array>

#include "debatekit/errors.hpp"
#include "debatekit/extraction.hpp"
#include "debatekit/util.hpp"

namespace debatekit {

namespace {

constexpr char kScoreSep = '\x1f';

/// Deterministic uniform stream; independent of std library distributions.
struct Rng {
  std::uint64_t state;

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    return splitmix64(state);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform() < p;
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

std::string canonical_question(std::string_view raw) {
  std::string q = trim(raw);
  while (!q.empty() && q.back() == '?') {
    q.pop_back();
    q = trim(q);
  }
  return q;
}

/// Question line of the prompt; the last one wins so that quoted prior
/// responses cannot shadow the instruction block.
std::optional<std::string> find_question(std::string_view prompt) {
  constexpr std::string_view kTag = "Question: ";
  auto pos = prompt.rfind(std::string("\n") + std::string(kTag));
  std::size_t begin;
  if (pos != std::string_view::npos) {
    begin = pos + 1 + kTag.size();
  } else if (prompt.substr(0, kTag.size()) == kTag) {
    begin = kTag.size();
  } else {
    return std::nullopt;
  }
  auto end = prompt.find('\n', begin);
  if (end == std::string_view::npos) end = prompt.size();
  return canonical_question(prompt.substr(begin, end - begin));
}

/// Token following `marker`, normalized as an answer of the given kind.
std::optional<AnswerKey> answer_after(std::string_view text, std::string_view marker,
                                      AnswerKind kind, bool last_occurrence) {
  std::size_t pos = last_occurrence ? irfind(text, marker) : ifind(text, marker);
  if (pos == std::string_view::npos) return std::nullopt;
  std::size_t i = pos + marker.size();
  while (i < text.size() && text[i] == ' ') ++i;
  std::size_t end = i;
  while (end < text.size() && text[end] != ' ' && text[end] != '\n') ++end;
  return normalize_answer(text.substr(i, end - i), kind);
}

struct PriorTexts {
  std::string person1;
  std::string person2;
};

std::optional<PriorTexts> find_prior(std::string_view prompt) {
  constexpr std::string_view kP1 = "Person 1 said: ";
  constexpr std::string_view kP2 = "\nPerson 2 said: ";
  constexpr std::string_view kEnd = "You should take these answers";
  auto p1 = prompt.find(kP1);
  if (p1 == std::string_view::npos) return std::nullopt;
  auto p2 = prompt.find(kP2, p1);
  if (p2 == std::string_view::npos) return std::nullopt;
  auto body2 = p2 + kP2.size();
  auto end = prompt.find(kEnd, body2);
  if (end == std::string_view::npos) return std::nullopt;
  PriorTexts prior;
  prior.person1 = std::string(prompt.substr(p1 + kP1.size(), p2 - (p1 + kP1.size())));
  std::string_view second = prompt.substr(body2, end - body2);
  while (!second.empty() && (second.back() == '\n' || second.back() == '\r'))
    second.remove_suffix(1);
  prior.person2 = std::string(second);
  return prior;
}

const std::array<std::string_view, 4> kActorLeads = {
    "Considering the passage carefully,",
    "Weighing the evidence again,",
    "On reflection,",
    "Looking at what we know,",
};

const std::array<std::string_view, 2> kCriticAgreeLeads = {
    "Your reasoning looks sound to me.",
    "I agree with your conclusion here.",
};

const std::array<std::string_view, 2> kCriticDisagreeLeads = {
    "I see a problem with your reasoning.",
    "The passage points the other way.",
};

}  // namespace

void ScriptedAgentParams::validate() const {
  for (double v : {p0, s, c, guided_compliance}) {
    if (!(v >= 0.0 && v <= 1.0))
      throw BackendError("scripted agent probabilities must lie in [0, 1]");
  }
}

ScriptedBackend::ScriptedBackend(ScriptedAgentParams params, std::vector<Task> tasks)
    : params_(params) {
  params_.validate();
  for (auto& task : tasks) {
    task.validate();
    tasks_by_question_[canonical_question(task.question)] = std::move(task);
  }
}

GenerationResult ScriptedBackend::generate(const GenerationRequest& request) {
  request.validate();
  const std::string prompt = render_context(request.messages);

  auto question = find_question(prompt);
  if (!question) throw BackendError("scripted backend: prompt has no question line");
  auto it = tasks_by_question_.find(*question);
  if (it == tasks_by_question_.end())
    throw BackendError("scripted backend: unknown question '" + *question + "'");
  const Task& task = it->second;
  const AnswerKind kind = answer_kind(task.kind);

  std::uint64_t call_seed = request.seed
                                ? *request.seed
                                : splitmix64(0xb0a710adull ^ unseeded_ordinal_.fetch_add(1));
  Rng rng{mix_seed(params_.seed, mix_seed(fnv1a(prompt), call_seed))};

  auto wrong_answer = [&]() -> AnswerKey {
    if (task.kind == TaskKind::yes_no)
      return AnswerKey{task.answer.value == "yes" ? "no" : "yes"};
    std::vector<std::string> wrong;
    for (const auto& c : task.choices) {
      if (c.label != task.answer.value) wrong.push_back(c.label);
    }
    return AnswerKey{wrong[rng.index(wrong.size())]};
  };
  auto gold_or_wrong = [&](double p_gold) {
    return rng.chance(p_gold) ? task.answer : wrong_answer();
  };

  const bool is_critic = prompt.find("\nMy Response: ") != std::string::npos;

  if (is_critic) {
    std::optional<AnswerKey> target =
        answer_after(prompt, "the correct answer is ", kind, /*last_occurrence=*/false);
    AnswerKey advocacy = (target && rng.chance(params_.guided_compliance))
                             ? *target
                             : gold_or_wrong(params_.c);

    constexpr std::string_view kTag = "\nMy Response: ";
    auto actor_begin = prompt.rfind(kTag);
    std::string_view actor_text = prompt;
    actor_text.remove_prefix(actor_begin + kTag.size());
    auto actor_answer = extract_answer(actor_text, kind);

    std::string_view lead;
    if (actor_answer && *actor_answer == advocacy) {
      lead = kCriticAgreeLeads[rng.index(kCriticAgreeLeads.size())];
    } else {
      lead = kCriticDisagreeLeads[rng.index(kCriticDisagreeLeads.size())];
    }
    std::string text = std::string(lead) + " The correct answer is " +
                       display_answer(advocacy, kind) + ".";
    return GenerationResult{std::move(text), std::nullopt, id()};
  }

  // Actor path: guided target, previous own answer, and critic advocacy all
  // come from the prompt text.
  std::optional<AnswerKey> target =
      answer_after(prompt, "your final answer is ", kind, /*last_occurrence=*/true);
  auto prior = find_prior(prompt);

  AnswerKey answer{};
  if (!prior) {
    if (target && rng.chance(params_.guided_compliance)) {
      answer = *target;
    } else {
      answer = gold_or_wrong(params_.p0);
    }
  } else {
    std::optional<AnswerKey> current = extract_answer(prior->person1, kind);
    if (!current) current = gold_or_wrong(params_.p0);

    auto natural_update = [&]() -> AnswerKey {
      std::optional<AnswerKey> advocacy =
          answer_after(prior->person2, "correct answer is ", kind, false);
      if (!advocacy) advocacy = extract_answer(prior->person2, kind);
      if (!advocacy) advocacy = gold_or_wrong(params_.c);
      if (*advocacy == *current) return *current;
      return rng.chance(params_.s) ? *advocacy : *current;
    };

    if (!target || *target == *current) {
      answer = target ? *current : natural_update();
    } else if (*target == task.answer) {
      answer = rng.chance(params_.guided_compliance) ? *target : natural_update();
    } else {
      // A wrong target that contradicts the current answer only lands when
      // the actor is persuadable: compliance gated by s.
      answer = rng.chance(params_.guided_compliance * params_.s) ? *target : natural_update();
    }
  }

  std::string_view lead = kActorLeads[rng.index(kActorLeads.size())];
  std::string disp = display_answer(answer, kind);
  std::string text =
      std::string(lead) + " I believe the right call is " + disp + ". Final Answer: " + disp + ".";
  return GenerationResult{std::move(text), std::nullopt, id()};
}

double ScriptedBackend::score_sequence(const std::vector<ChatMessage>& context,
                                       const std::string& target) {
  if (target.empty()) throw BackendError("score_sequence: empty target");
  const std::string ctx = render_context(context);

  auto full_key = fnv1a(target, fnv1a(std::string_view(&kScoreSep, 1), fnv1a(ctx)));
  if (auto it = full_scores_.find(full_key); it != full_scores_.end()) return it->second;

  double total = 0.0;
  bool any_token = false;
  std::size_t i = 0;
  while (i < target.size()) {
    while (i < target.size() && (target[i] == ' ' || target[i] == '\t' || target[i] == '\n' ||
                                 target[i] == '\r'))
      ++i;
    std::size_t b = i;
    while (i < target.size() && target[i] != ' ' && target[i] != '\t' && target[i] != '\n' &&
           target[i] != '\r')
      ++i;
    if (i == b) continue;
    any_token = true;
    std::string_view token = std::string_view(target).substr(b, i - b);
    // Accumulated context is a pure concatenation, which makes scores add up
    // across any whitespace split of the target.
    std::uint64_t acc = fnv1a(std::string_view(target).substr(0, b), fnv1a(ctx));
    std::uint64_t key = fnv1a(token, fnv1a(std::string_view(&kScoreSep, 1), acc));
    if (auto it = token_scores_.find(key); it != token_scores_.end()) {
      total += it->second;
    } else {
      total -= 0.25 + static_cast<double>(splitmix64(key) % 4096) / 4096.0 * 2.75;
    }
  }
  if (!any_token) throw BackendError("score_sequence: target has no tokens");
  return total;
}

void ScriptedBackend::set_score(const std::vector<ChatMessage>& context,
                                const std::string& target, double logprob) {
  const std::string ctx = render_context(context);
  full_scores_[fnv1a(target, fnv1a(std::string_view(&kScoreSep, 1), fnv1a(ctx)))] = logprob;
}

void ScriptedBackend::set_token_score(const std::string& accumulated_context,
                                      const std::string& token, double logprob) {
  std::uint64_t acc = fnv1a(accumulated_context);
  token_scores_[fnv1a(token, fnv1a(std::string_view(&kScoreSep, 1), acc))] = logprob;
}

}  // namespace debatekit

#include "debatekit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "debatekit/errors.hpp"
#include "debatekit/jsonl.hpp"
#include "debatekit/util.hpp"

namespace debatekit {

namespace {

constexpr int kMaxChoices = 26;

[[noreturn]] void fail_at(const std::filesystem::path& file, std::size_t line,
                          const std::string& message) {
  throw CorpusError(file.string() + ":" + std::to_string(line) + ": " + message);
}

std::string canonical_question(std::string q) {
  q = trim(q);
  // Templates supply the question mark where the wording calls for one.
  while (!q.empty() && q.back() == '?') {
    q.pop_back();
    q = trim(q);
  }
  return q;
}

std::string line_id(const json& doc, const FieldMap& fields, std::size_t line) {
  if (doc.contains(fields.id)) {
    const auto& v = doc.at(fields.id);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%05zu", line);
  return buf;
}

std::string require_string(const json& doc, const std::string& key,
                           const std::filesystem::path& file, std::size_t line) {
  if (!doc.contains(key)) fail_at(file, line, "missing field '" + key + "'");
  if (!doc.at(key).is_string()) fail_at(file, line, "field '" + key + "' must be a string");
  return doc.at(key).get<std::string>();
}

Task parse_boolq_like(const json& doc, const FieldMap& fields,
                      const std::filesystem::path& file, std::size_t line) {
  Task task;
  task.kind = TaskKind::yes_no;
  task.id = line_id(doc, fields, line);
  task.question = canonical_question(require_string(doc, fields.question, file, line));
  if (doc.contains(fields.passage)) {
    if (!doc.at(fields.passage).is_string())
      fail_at(file, line, "field '" + fields.passage + "' must be a string");
    task.passage = trim(doc.at(fields.passage).get<std::string>());
  }
  if (!doc.contains(fields.answer)) fail_at(file, line, "missing field '" + fields.answer + "'");
  const auto& ans = doc.at(fields.answer);
  if (ans.is_boolean()) {
    task.answer = AnswerKey{ans.get<bool>() ? "yes" : "no"};
  } else if (ans.is_string()) {
    auto key = normalize_answer(ans.get<std::string>(), AnswerKind::yes_no);
    if (!key) fail_at(file, line, "answer '" + ans.get<std::string>() + "' is not yes/no");
    task.answer = *key;
  } else {
    fail_at(file, line, "field '" + fields.answer + "' must be a boolean or yes/no string");
  }
  return task;
}

Task parse_mc_like(const json& doc, const FieldMap& fields,
                   const std::filesystem::path& file, std::size_t line) {
  Task task;
  task.kind = TaskKind::multi_choice;
  task.id = line_id(doc, fields, line);
  task.question = canonical_question(require_string(doc, fields.question, file, line));
  if (doc.contains(fields.passage)) {
    if (!doc.at(fields.passage).is_string())
      fail_at(file, line, "field '" + fields.passage + "' must be a string");
    task.passage = trim(doc.at(fields.passage).get<std::string>());
  }
  if (!doc.contains(fields.choices) || !doc.at(fields.choices).is_array())
    fail_at(file, line, "field '" + fields.choices + "' must be an array");
  const auto& choices = doc.at(fields.choices);
  if (choices.size() < 2) fail_at(file, line, "need at least 2 choices");
  if (choices.size() > kMaxChoices)
    fail_at(file, line, "too many choices (max " + std::to_string(kMaxChoices) + ")");
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (!choices[i].is_string()) fail_at(file, line, "choices must be strings");
    task.choices.push_back(
        Choice{std::string(1, static_cast<char>('A' + i)), trim(choices[i].get<std::string>())});
  }
  if (!doc.contains(fields.answer_index) || !doc.at(fields.answer_index).is_number_integer())
    fail_at(file, line, "missing integer field '" + fields.answer_index + "'");
  auto idx = doc.at(fields.answer_index).get<long long>();
  if (idx < 0 || idx >= static_cast<long long>(choices.size()))
    fail_at(file, line, "answer_index " + std::to_string(idx) + " out of range");
  task.answer = AnswerKey{task.choices[static_cast<std::size_t>(idx)].label};
  return task;
}

void check_unique_ids(const Corpus& corpus, const std::filesystem::path& file) {
  std::unordered_set<std::string> seen;
  for (const auto& task : corpus.tasks) {
    if (!seen.insert(task.id).second)
      throw CorpusError(file.string() + ": duplicate task id '" + task.id + "'");
  }
}

/// Deterministic generator independent of standard-library distributions.
struct Splitmix {
  std::uint64_t state;

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    return splitmix64(state);
  }

  // Bounded draw without modulo bias.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = ~0ull - (~0ull % n);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }
};

}  // namespace

std::string_view to_string(TaskKind kind) {
  return kind == TaskKind::yes_no ? "yes_no" : "multi_choice";
}

TaskKind task_kind_from_string(std::string_view s) {
  if (s == "yes_no") return TaskKind::yes_no;
  if (s == "multi_choice") return TaskKind::multi_choice;
  throw CorpusError("unknown task kind: " + std::string(s));
}

AnswerKind answer_kind(TaskKind kind) {
  return kind == TaskKind::yes_no ? AnswerKind::yes_no : AnswerKind::multi_choice;
}

void Task::validate() const {
  if (id.empty()) throw CorpusError("task has empty id");
  if (question.empty()) throw CorpusError("task " + id + ": empty question");
  if (kind == TaskKind::yes_no) {
    if (!choices.empty()) throw CorpusError("task " + id + ": yes_no task has choices");
    if (answer.value != "yes" && answer.value != "no")
      throw CorpusError("task " + id + ": yes_no answer must be yes or no");
  } else {
    if (choices.size() < 2) throw CorpusError("task " + id + ": needs at least 2 choices");
    if (choices.size() > kMaxChoices) throw CorpusError("task " + id + ": too many choices");
    bool found = false;
    std::unordered_set<std::string> labels;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      const auto& c = choices[i];
      if (c.label != std::string(1, static_cast<char>('A' + i)))
        throw CorpusError("task " + id + ": choice labels must be A, B, ... in order");
      if (!labels.insert(c.label).second)
        throw CorpusError("task " + id + ": duplicate choice label " + c.label);
      if (c.label == answer.value) found = true;
    }
    if (!found) throw CorpusError("task " + id + ": answer " + answer.value + " not a choice");
  }
}

SourceFormat source_format_from_string(std::string_view s) {
  if (s == "boolq_like") return SourceFormat::boolq_like;
  if (s == "mc_like") return SourceFormat::mc_like;
  throw CorpusError("unknown source format: " + std::string(s));
}

Corpus load_corpus(const std::filesystem::path& file, SourceFormat format,
                   const FieldMap& fields, std::string name) {
  Corpus corpus;
  corpus.name = name.empty() ? file.stem().string() : std::move(name);
  try {
    for_each_jsonl(file, [&](std::size_t line, const json& doc) {
      if (!doc.is_object()) fail_at(file, line, "expected a JSON object");
      Task task = format == SourceFormat::boolq_like ? parse_boolq_like(doc, fields, file, line)
                                                     : parse_mc_like(doc, fields, file, line);
      try {
        task.validate();
      } catch (const CorpusError& e) {
        fail_at(file, line, e.what());
      }
      corpus.tasks.push_back(std::move(task));
    });
  } catch (const CorpusError&) {
    throw;
  } catch (const Error& e) {
    throw CorpusError(e.what());
  }
  check_unique_ids(corpus, file);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& file) {
  std::vector<json> lines;
  lines.reserve(corpus.tasks.size());
  for (const auto& task : corpus.tasks) {
    json doc;
    doc["id"] = task.id;
    doc["kind"] = to_string(task.kind);
    doc["question"] = task.question;
    if (!task.passage.empty()) doc["passage"] = task.passage;
    if (!task.choices.empty()) {
      json arr = json::array();
      for (const auto& c : task.choices) arr.push_back({{"label", c.label}, {"text", c.text}});
      doc["choices"] = arr;
    }
    doc["answer"] = task.answer.value;
    lines.push_back(std::move(doc));
  }
  write_jsonl(file, lines);
}

Corpus load_canonical(const std::filesystem::path& file, std::string name) {
  Corpus corpus;
  corpus.name = name.empty() ? file.stem().string() : std::move(name);
  try {
    for_each_jsonl(file, [&](std::size_t line, const json& doc) {
      Task task;
      try {
        task.id = doc.at("id").get<std::string>();
        task.kind = task_kind_from_string(doc.at("kind").get<std::string>());
        task.question = doc.at("question").get<std::string>();
        if (doc.contains("passage")) task.passage = doc.at("passage").get<std::string>();
        if (doc.contains("choices")) {
          for (const auto& c : doc.at("choices"))
            task.choices.push_back(
                Choice{c.at("label").get<std::string>(), c.at("text").get<std::string>()});
        }
        task.answer = AnswerKey{doc.at("answer").get<std::string>()};
      } catch (const nlohmann::json::exception& e) {
        fail_at(file, line, std::string("malformed canonical task: ") + e.what());
      }
      try {
        task.validate();
      } catch (const CorpusError& e) {
        fail_at(file, line, e.what());
      }
      corpus.tasks.push_back(std::move(task));
    });
  } catch (const CorpusError&) {
    throw;
  } catch (const Error& e) {
    throw CorpusError(e.what());
  }
  check_unique_ids(corpus, file);
  return corpus;
}

CorpusSplits split_corpus(const Corpus& corpus, SplitFractions fractions, std::uint64_t seed) {
  if (fractions.test < 0 || fractions.validation < 0)
    throw CorpusError("split fractions must be non-negative");
  if (fractions.test + fractions.validation > 1.0)
    throw CorpusError("split fractions sum to more than 1");

  const std::size_t n = corpus.tasks.size();
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions.test));
  auto n_val =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions.validation));
  if (n_test > n) n_test = n;
  if (n_test + n_val > n) n_val = n - n_test;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Splitmix rng{mix_seed(seed, fnv1a(corpus.name))};
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(order[i - 1], order[j]);
  }

  auto collect = [&](std::size_t begin, std::size_t count, std::string tag) {
    std::vector<std::size_t> picked(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                    order.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(picked.begin(), picked.end());  // keep source order within the split
    Corpus out;
    out.name = corpus.name;
    out.split = std::move(tag);
    out.tasks.reserve(count);
    for (auto idx : picked) out.tasks.push_back(corpus.tasks[idx]);
    return out;
  };

  CorpusSplits splits;
  splits.test = collect(0, n_test, "test");
  splits.validation = collect(n_test, n_val, "validation");
  splits.train = collect(n_test + n_val, n - n_test - n_val, "train");
  return splits;
}

}  // namespace debatekit

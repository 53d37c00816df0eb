#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "debatekit/answers.hpp"

namespace debatekit {

enum class TaskKind { yes_no, multi_choice };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view s);
AnswerKind answer_kind(TaskKind kind);

struct Choice {
  std::string label;  // single uppercase letter
  std::string text;

  friend bool operator==(const Choice&, const Choice&) = default;
};

struct Task {
  std::string id;
  TaskKind kind = TaskKind::yes_no;
  std::string question;
  std::string passage;          // empty when the task has no passage
  std::vector<Choice> choices;  // empty for yes_no tasks
  AnswerKey answer;

  /// Throws CorpusError when a structural invariant is violated.
  void validate() const;

  friend bool operator==(const Task&, const Task&) = default;
};

struct Corpus {
  std::string name;
  std::string split = "full";  // "full", "train", "validation", or "test"
  std::vector<Task> tasks;
};

enum class SourceFormat { boolq_like, mc_like };

SourceFormat source_format_from_string(std::string_view s);

/// Source-field names, overridable for sources with nonstandard keys.
struct FieldMap {
  std::string id = "id";
  std::string question = "question";
  std::string passage = "passage";
  std::string answer = "answer";            // boolq_like: bool or yes/no string
  std::string choices = "choices";          // mc_like: array of strings
  std::string answer_index = "answer_index";  // mc_like: 0-based gold index
};

/// Loads a raw JSONL source into canonical tasks. Unknown ids fall back to
/// zero-padded line numbers. Every error message carries file:line.
Corpus load_corpus(const std::filesystem::path& file, SourceFormat format,
                   const FieldMap& fields = {}, std::string name = "");

/// Canonical JSONL round-trip.
void save_corpus(const Corpus& corpus, const std::filesystem::path& file);
Corpus load_canonical(const std::filesystem::path& file, std::string name = "");

struct SplitFractions {
  double test = 0.25;
  double validation = 0.10;
};

struct CorpusSplits {
  Corpus train;
  Corpus validation;
  Corpus test;
};

/// Seeded disjoint split; fractions apply to test and validation, the
/// remainder is train. Task order within each split follows the source order.
CorpusSplits split_corpus(const Corpus& corpus, SplitFractions fractions,
                          std::uint64_t seed);

}  // namespace debatekit

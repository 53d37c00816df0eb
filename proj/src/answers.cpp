#include "debatekit/answers.hpp"

#include "debatekit/errors.hpp"
#include "debatekit/util.hpp"

namespace debatekit {

namespace {

// Strips surrounding whitespace, quotes, brackets, and sentence punctuation.
std::string_view strip_decorations(std::string_view s) {
  const std::string_view lead = " \t\r\n\"'([{*";
  const std::string_view tail = " \t\r\n\"')]}*.,;:!?";
  auto b = s.find_first_not_of(lead);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(tail);
  if (e == std::string_view::npos || e < b) return {};
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::yes_no: return "yes_no";
    case AnswerKind::multi_choice: return "multi_choice";
    case AnswerKind::free_form: return "free_form";
  }
  return "free_form";
}

AnswerKind answer_kind_from_string(std::string_view s) {
  if (s == "yes_no") return AnswerKind::yes_no;
  if (s == "multi_choice") return AnswerKind::multi_choice;
  if (s == "free_form") return AnswerKind::free_form;
  throw Error("unknown answer kind: " + std::string(s));
}

std::optional<AnswerKey> normalize_answer(std::string_view raw, AnswerKind kind) {
  std::string_view core = strip_decorations(raw);
  if (core.empty()) return std::nullopt;

  switch (kind) {
    case AnswerKind::yes_no: {
      std::string low = to_lower(core);
      if (low == "yes" || low == "true") return AnswerKey{"yes"};
      if (low == "no" || low == "false") return AnswerKey{"no"};
      return std::nullopt;
    }
    case AnswerKind::multi_choice: {
      if (core.size() != 1) return std::nullopt;
      char c = core[0];
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      if (c < 'A' || c > 'Z') return std::nullopt;
      return AnswerKey{std::string(1, c)};
    }
    case AnswerKind::free_form:
      return AnswerKey{to_lower(core)};
  }
  return std::nullopt;
}

std::string display_answer(const AnswerKey& key, AnswerKind kind) {
  switch (kind) {
    case AnswerKind::yes_no:
      return key.value == "yes" ? "Yes" : "No";
    case AnswerKind::multi_choice:
      return "(" + key.value + ")";
    case AnswerKind::free_form:
      return key.value;
  }
  return key.value;
}

}  // namespace debatekit

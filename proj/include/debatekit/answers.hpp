#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace debatekit {

/// Shape of the answer space a text is interpreted against.
enum class AnswerKind { yes_no, multi_choice, free_form };

std::string_view to_string(AnswerKind kind);
AnswerKind answer_kind_from_string(std::string_view s);

/// Canonical answer value: "yes"/"no", an uppercase choice letter, or a
/// lowercase free-form token.
struct AnswerKey {
  std::string value;

  friend bool operator==(const AnswerKey&, const AnswerKey&) = default;
};

/// Maps raw answer text to its canonical key, or nullopt when the text is not
/// a valid answer of the given kind. Accepts yes/no/true/false (any case) for
/// yes_no, a single ASCII letter (optionally parenthesized) for multi_choice,
/// and any non-empty token for free_form.
std::optional<AnswerKey> normalize_answer(std::string_view raw, AnswerKind kind);

/// Renders a key the way prompts and responses spell it: "Yes"/"No" for
/// yes_no, "(B)" for multi_choice, the raw value for free_form.
std::string display_answer(const AnswerKey& key, AnswerKind kind);

}  // namespace debatekit

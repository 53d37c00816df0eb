#pragma once

#include <optional>
#include <string_view>

#include "debatekit/answers.hpp"

namespace debatekit {

/// Maps a model response to its committed answer, or nullopt when the text
/// does not commit to one. Scans answer markers ("final answer", "answer:")
/// from the last occurrence backwards, then falls back to the last standalone
/// answer-shaped token (yes/no/true/false, a parenthesized or standalone
/// choice letter, or the last word for free-form).
std::optional<AnswerKey> extract_answer(std::string_view text, AnswerKind kind);

}  // namespace debatekit

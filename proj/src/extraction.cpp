#include "debatekit/extraction.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include "debatekit/util.hpp"

namespace debatekit {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

bool is_separator(char c) {
  return is_space(c) || c == ',' || c == '.' || c == ':' || c == ';' || c == '!' || c == '-' ||
         c == '*' || c == '"' || c == '\'';
}

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_lower(c) || (c >= 'A' && c <= 'Z'); }

/// Single-letter tokens are only answers when they do not read as prose; a
/// letter directly followed by a lowercase word ("A zygote", "I think") is
/// treated as an article or pronoun.
bool letter_reads_as_prose(std::string_view text, std::size_t token_end) {
  std::size_t i = token_end;
  if (i >= text.size() || !is_space(text[i])) return false;
  while (i < text.size() && is_space(text[i])) ++i;
  return i < text.size() && is_lower(text[i]);
}

std::optional<AnswerKey> candidate_from_token(std::string_view text, std::size_t begin,
                                              std::size_t end, AnswerKind kind) {
  std::string_view token = text.substr(begin, end - begin);
  if (token.empty()) return std::nullopt;
  if (kind == AnswerKind::multi_choice || kind == AnswerKind::yes_no) {
    bool parenthesized = token.front() == '(' && token.find(')') != std::string_view::npos;
    auto key = normalize_answer(token, kind);
    if (!key) return std::nullopt;
    if (kind == AnswerKind::multi_choice && !parenthesized) {
      if (letter_reads_as_prose(text, end)) return std::nullopt;
    }
    return key;
  }
  return normalize_answer(token, kind);
}

/// Parses the answer committed directly after a marker, skipping filler such
/// as "is" or "the" and leading punctuation.
std::optional<AnswerKey> parse_after_marker(std::string_view text, std::size_t from,
                                            AnswerKind kind) {
  std::size_t i = from;
  auto skip_separators = [&] {
    while (i < text.size() && is_separator(text[i])) ++i;
  };
  skip_separators();
  static constexpr std::array<std::string_view, 4> kFiller = {"is", "was", "be", "the"};
  for (bool skipped = true; skipped;) {
    skipped = false;
    for (auto f : kFiller) {
      if (i + f.size() <= text.size() && to_lower(text.substr(i, f.size())) == f &&
          (i + f.size() == text.size() || !is_alpha(text[i + f.size()]))) {
        i += f.size();
        skip_separators();
        skipped = true;
        break;
      }
    }
  }
  if (i >= text.size()) return std::nullopt;
  if (text[i] == '(') {
    auto close = text.find(')', i);
    if (close != std::string_view::npos && close - i <= 4)
      return candidate_from_token(text, i, close + 1, kind);
    return std::nullopt;
  }
  std::size_t end = i;
  while (end < text.size() && !is_space(text[end])) ++end;
  return candidate_from_token(text, i, end, kind);
}

std::optional<AnswerKey> fallback_scan(std::string_view text, AnswerKind kind) {
  // Collect whitespace-delimited tokens, then walk them from the end.
  std::vector<std::pair<std::size_t, std::size_t>> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t b = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > b) tokens.emplace_back(b, i);
  }
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    auto [b, e] = *it;
    switch (kind) {
      case AnswerKind::yes_no: {
        auto key = normalize_answer(text.substr(b, e - b), kind);
        if (key) return key;
        break;
      }
      case AnswerKind::multi_choice: {
        auto key = candidate_from_token(text, b, e, kind);
        if (key) return key;
        break;
      }
      case AnswerKind::free_form: {
        auto key = normalize_answer(text.substr(b, e - b), kind);
        if (key) return key;
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<AnswerKey> extract_answer(std::string_view text, AnswerKind kind) {
  static constexpr std::array<std::string_view, 2> kMarkers = {"final answer", "answer:"};
  // Gather marker hits, then try them from the last one backwards: the
  // latest commitment in a response wins.
  std::vector<std::pair<std::size_t, std::size_t>> hits;  // (position, marker length)
  for (auto marker : kMarkers) {
    std::size_t pos = 0;
    while ((pos = ifind(text, marker, pos)) != std::string_view::npos) {
      hits.emplace_back(pos, marker.size());
      ++pos;
    }
  }
  std::sort(hits.begin(), hits.end());
  for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
    auto key = parse_after_marker(text, it->first + it->second, kind);
    if (key) return key;
  }
  return fallback_scan(text, kind);
}

}  // namespace debatekit

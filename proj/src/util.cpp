#include "debatekit/util.hpp"

namespace debatekit {

namespace {

char lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool iequal_at(std::string_view haystack, std::size_t pos, std::string_view needle) {
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (lower_ascii(haystack[pos + i]) != lower_ascii(needle[i])) return false;
  }
  return true;
}

}  // namespace

std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from <= haystack.size() ? from : std::string_view::npos;
  if (haystack.size() < needle.size()) return std::string_view::npos;
  for (std::size_t pos = from; pos + needle.size() <= haystack.size(); ++pos) {
    if (iequal_at(haystack, pos, needle)) return pos;
  }
  return std::string_view::npos;
}

std::size_t irfind(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string_view::npos;
  for (std::size_t pos = haystack.size() - needle.size() + 1; pos-- > 0;) {
    if (iequal_at(haystack, pos, needle)) return pos;
  }
  return std::string_view::npos;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  if (from.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace debatekit

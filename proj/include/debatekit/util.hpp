#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace debatekit {

/// FNV-1a 64-bit hash. Used for every content-derived seed so that results are
/// stable across platforms and standard-library implementations.
constexpr std::uint64_t fnv1a(std::string_view data,
                              std::uint64_t state = 14695981039346656037ull) {
  for (unsigned char c : data) {
    state ^= c;
    state *= 1099511628211ull;
  }
  return state;
}

/// SplitMix64 finalizer; decorrelates structured seed inputs.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Order-sensitive combination of two seed components.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b ^ 0x5bd1e9955bd1e995ull));
}

inline std::string_view trim_view(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

/// Case-insensitive search for ASCII needles. Returns npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);

/// Rightmost case-insensitive occurrence, or npos.
std::size_t irfind(std::string_view haystack, std::string_view needle);

/// Replaces every occurrence of `from` in `text` with `to`.
std::string replace_all(std::string text, std::string_view from, std::string_view to);

}  // namespace debatekit

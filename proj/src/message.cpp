#include "debatekit/message.hpp"

#include "debatekit/errors.hpp"

namespace debatekit {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw Error("unknown chat role: " + std::string(s));
}

std::string render_context(const std::vector<ChatMessage>& messages) {
  // Pure concatenation: appending an assistant message extends the rendered
  // string by exactly its content, which sequence scoring relies on.
  std::string out;
  for (const auto& m : messages) out += m.content;
  return out;
}

}  // namespace debatekit

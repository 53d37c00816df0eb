#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace debatekit {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Plain-text flattening of a message list; the canonical scoring context.
std::string render_context(const std::vector<ChatMessage>& messages);

}  // namespace debatekit

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace debatekit {

using json = nlohmann::ordered_json;

/// Calls `consume(line_number, parsed)` for each non-blank line. Parse errors
/// are reported with file and 1-based line number.
void for_each_jsonl(const std::filesystem::path& file,
                    const std::function<void(std::size_t, const json&)>& consume);

std::vector<json> read_jsonl(const std::filesystem::path& file);

/// Writes one compact JSON document per line. Overwrites the file.
void write_jsonl(const std::filesystem::path& file, const std::vector<json>& lines);

}  // namespace debatekit

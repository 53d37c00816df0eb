#include "debatekit/jsonl.hpp"

#include <fstream>

#include "debatekit/errors.hpp"
#include "debatekit/util.hpp"

namespace debatekit {

void for_each_jsonl(const std::filesystem::path& file,
                    const std::function<void(std::size_t, const json&)>& consume) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(file.string() + ":" + std::to_string(line_no) +
                  ": invalid JSON: " + e.what());
    }
    consume(line_no, doc);
  }
}

std::vector<json> read_jsonl(const std::filesystem::path& file) {
  std::vector<json> out;
  for_each_jsonl(file, [&](std::size_t, const json& doc) { out.push_back(doc); });
  return out;
}

void write_jsonl(const std::filesystem::path& file, const std::vector<json>& lines) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  for (const auto& doc : lines) out << doc.dump() << '\n';
  if (!out) throw Error("write failed for " + file.string());
}

}  // namespace debatekit

#include "debatekit/config.hpp"

#include <fstream>

#include "json.hpp"

#include "debatekit/errors.hpp"

namespace debatekit {

namespace {

using nlohmann::ordered_json;

void check_keys(const ordered_json& obj, std::initializer_list<std::string_view> known,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (auto k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + context);
  }
}

template <typename T>
void read_into(const ordered_json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

BackendSpec parse_backend(const ordered_json& obj, const std::string& context) {
  check_keys(obj,
             {"kind", "p0", "s", "c", "guided_compliance", "seed", "base_url", "path", "model",
              "api_token", "token_env", "max_attempts", "backoff_base_ms", "timeout_ms",
              "request_logprobs"},
             context);
  BackendSpec spec;
  read_into(obj, "kind", spec.kind);
  if (spec.kind == "scripted") {
    read_into(obj, "p0", spec.scripted.p0);
    read_into(obj, "s", spec.scripted.s);
    read_into(obj, "c", spec.scripted.c);
    read_into(obj, "guided_compliance", spec.scripted.guided_compliance);
    read_into(obj, "seed", spec.scripted.seed);
    spec.scripted.validate();
  } else if (spec.kind == "remote") {
    read_into(obj, "base_url", spec.remote.base_url);
    read_into(obj, "path", spec.remote.path);
    read_into(obj, "model", spec.remote.model);
    read_into(obj, "api_token", spec.remote.api_token);
    read_into(obj, "token_env", spec.remote.token_env);
    read_into(obj, "max_attempts", spec.remote.max_attempts);
    read_into(obj, "backoff_base_ms", spec.remote.backoff_base_ms);
    read_into(obj, "timeout_ms", spec.remote.timeout_ms);
    read_into(obj, "request_logprobs", spec.remote.request_logprobs);
    spec.remote.validate();
  } else {
    throw ConfigError("backend kind must be 'scripted' or 'remote', got '" + spec.kind + "'");
  }
  return spec;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(file.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(file.string() + ": config must be a JSON object");
  check_keys(doc, {"backend", "critic_backend", "debate", "data", "corpus", "templates_dir",
                   "max_in_flight"},
             "config root");

  RunConfig config;
  if (doc.contains("backend")) config.backend = parse_backend(doc.at("backend"), "backend");
  if (doc.contains("critic_backend"))
    config.critic_backend = parse_backend(doc.at("critic_backend"), "critic_backend");

  if (doc.contains("debate")) {
    const auto& d = doc.at("debate");
    check_keys(d,
               {"total_rounds", "temperature_debate", "temperature_rollout", "max_tokens",
                "keep_prompts", "seed"},
               "debate block");
    read_into(d, "total_rounds", config.total_rounds);
    read_into(d, "temperature_debate", config.temperature_debate);
    read_into(d, "temperature_rollout", config.temperature_rollout);
    read_into(d, "max_tokens", config.max_tokens);
    read_into(d, "keep_prompts", config.keep_prompts);
    read_into(d, "seed", config.seed);
  }

  if (doc.contains("data")) {
    const auto& d = doc.at("data");
    check_keys(d, {"epsilon", "rollouts", "rounds_to_probe", "target_roles", "seed"},
               "data block");
    read_into(d, "epsilon", config.plan.epsilon);
    read_into(d, "rollouts", config.plan.rollouts);
    read_into(d, "rounds_to_probe", config.plan.rounds_to_probe);
    if (d.contains("target_roles"))
      config.plan.target_roles =
          target_roles_from_string(d.at("target_roles").get<std::string>());
    read_into(d, "seed", config.plan.seed);
    config.plan.validate();
  }

  if (doc.contains("corpus")) {
    const auto& c = doc.at("corpus");
    check_keys(c, {"format", "fields"}, "corpus block");
    if (c.contains("format"))
      config.corpus_format = source_format_from_string(c.at("format").get<std::string>());
    if (c.contains("fields")) {
      const auto& f = c.at("fields");
      check_keys(f, {"id", "question", "passage", "answer", "choices", "answer_index"},
                 "corpus fields");
      read_into(f, "id", config.fields.id);
      read_into(f, "question", config.fields.question);
      read_into(f, "passage", config.fields.passage);
      read_into(f, "answer", config.fields.answer);
      read_into(f, "choices", config.fields.choices);
      read_into(f, "answer_index", config.fields.answer_index);
    }
  }

  read_into(doc, "templates_dir", config.templates_dir);
  read_into(doc, "max_in_flight", config.max_in_flight);
  if (config.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  return config;
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const std::vector<Task>& tasks) {
  if (spec.kind == "scripted") return std::make_unique<ScriptedBackend>(spec.scripted, tasks);
  if (spec.kind == "remote") return std::make_unique<RemoteBackend>(spec.remote);
  throw ConfigError("backend kind must be 'scripted' or 'remote', got '" + spec.kind + "'");
}

}  // namespace debatekit

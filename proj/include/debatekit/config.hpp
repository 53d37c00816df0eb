#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "debatekit/corpus.hpp"
#include "debatekit/remote_backend.hpp"
#include "debatekit/rewards.hpp"
#include "debatekit/scripted_backend.hpp"

namespace debatekit {

struct BackendSpec {
  std::string kind = "scripted";  // "scripted" or "remote"
  ScriptedAgentParams scripted;
  RemoteConfig remote;
};

/// Everything a CLI run needs beyond the corpus itself. Loadable from a JSON
/// file; unknown keys are rejected so typos surface early.
struct RunConfig {
  BackendSpec backend;
  std::optional<BackendSpec> critic_backend;  // defaults to `backend`

  int total_rounds = 5;
  double temperature_debate = 0.7;
  double temperature_rollout = 1.0;
  int max_tokens = 512;
  bool keep_prompts = false;
  std::uint64_t seed = 0;

  GenerationPlan plan;

  SourceFormat corpus_format = SourceFormat::boolq_like;
  FieldMap fields;

  std::string templates_dir;
  int max_in_flight = 4;
};

RunConfig load_run_config(const std::filesystem::path& file);

/// Builds a backend; scripted backends receive the corpus tasks they will be
/// asked about.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const std::vector<Task>& tasks);

}  // namespace debatekit

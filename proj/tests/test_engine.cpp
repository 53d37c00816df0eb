#include <string>

#include "doctest.h"
#include "support.hpp"

#include "debatekit/engine.hpp"
#include "debatekit/errors.hpp"
#include "debatekit/extraction.hpp"
#include "debatekit/scripted_backend.hpp"

using namespace debatekit;
using testsupport::yes_no_corpus;
using testsupport::yes_no_task;

namespace {

struct Fixture {
  Corpus corpus = yes_no_corpus(3);
  ScriptedBackend backend;
  DebateConfig config;

  explicit Fixture(double p0 = 0.6, double s = 0.5, double c = 0.7) : backend(make_params(p0, s, c), corpus.tasks) {
    config.actor = &backend;
    config.critic = &backend;
    config.total_rounds = 5;
    config.seed = 21;
    config.keep_prompts = true;
  }

  static ScriptedAgentParams make_params(double p0, double s, double c) {
    ScriptedAgentParams params;
    params.p0 = p0;
    params.s = s;
    params.c = c;
    params.seed = 9;
    return params;
  }
};

}  // namespace

TEST_CASE("run_debate produces the full protocol shape") {
  Fixture fx;
  const Task& task = fx.corpus.tasks[0];
  Trajectory trajectory = run_debate(task, fx.config);

  CHECK(trajectory.task_id == task.id);
  CHECK(trajectory.complete());
  REQUIRE(trajectory.rounds.size() == 5);
  CHECK(trajectory.config.actor_backend == "scripted");
  CHECK(trajectory.config.seed == 21);

  for (std::size_t t = 0; t < trajectory.rounds.size(); ++t) {
    const RoundRecord& round = trajectory.rounds[t];
    CHECK(round.index == static_cast<int>(t));
    CHECK_FALSE(round.actor_text.empty());
    CHECK_FALSE(round.critic_text.empty());
    CHECK(round.actor_guidance.mode == GuidanceMode::natural);

    REQUIRE(round.actor_prompt.has_value());
    REQUIRE(round.critic_prompt.has_value());
    const std::string& actor_prompt = round.actor_prompt->front().content;
    const std::string& critic_prompt = round.critic_prompt->front().content;

    // The critic always sees the same round's actor response.
    CHECK(critic_prompt.find("My Response: " + round.actor_text) != std::string::npos);

    if (t == 0) {
      CHECK(actor_prompt.find("Person 1") == std::string::npos);
    } else {
      // The actor sees exactly the previous round's exchange.
      const RoundRecord& prev = trajectory.rounds[t - 1];
      CHECK(actor_prompt.find("Person 1 said: " + prev.actor_text) != std::string::npos);
      CHECK(actor_prompt.find("Person 2 said: " + prev.critic_text) != std::string::npos);
    }
  }
}

TEST_CASE("stored answers match extraction of the stored text") {
  Fixture fx;
  for (const Task& task : fx.corpus.tasks) {
    Trajectory trajectory = run_debate(task, fx.config);
    for (const RoundRecord& round : trajectory.rounds) {
      auto again = extract_answer(round.actor_text, answer_kind(task.kind));
      CHECK(round.actor_answer == again);
    }
  }
}

TEST_CASE("debates are deterministic under a fixed seed") {
  Fixture fx;
  const Task& task = fx.corpus.tasks[1];
  auto a = trajectory_to_json(run_debate(task, fx.config)).dump();
  auto b = trajectory_to_json(run_debate(task, fx.config)).dump();
  CHECK(a == b);

  Fixture other;
  other.config.seed = 22;
  auto c = trajectory_to_json(run_debate(task, other.config)).dump();
  CHECK(a != c);
}

TEST_CASE("resume_debate preserves the prefix and completes naturally") {
  Fixture fx;
  const Task& task = fx.corpus.tasks[0];
  Trajectory full = run_debate(task, fx.config);

  Trajectory prefix = full;
  prefix.rounds.resize(2);
  Trajectory resumed = resume_debate(task, prefix, fx.config, /*rollout_salt=*/400);
  CHECK(resumed.complete());
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(resumed.rounds[t].actor_text == full.rounds[t].actor_text);
    CHECK(resumed.rounds[t].critic_text == full.rounds[t].critic_text);
  }
  for (const RoundRecord& round : resumed.rounds) {
    CHECK(round.actor_guidance.mode == GuidanceMode::natural);
    CHECK(round.critic_guidance.mode == GuidanceMode::natural);
  }

  // Same salt reproduces the same continuation; different salts explore.
  Trajectory again = resume_debate(task, prefix, fx.config, 400);
  CHECK(trajectory_to_json(again).dump() == trajectory_to_json(resumed).dump());
}

TEST_CASE("resume_debate rejects bad prefixes") {
  Fixture fx;
  const Task& task = fx.corpus.tasks[0];
  Trajectory full = run_debate(task, fx.config);

  CHECK_THROWS_WITH_AS(resume_debate(task, full, fx.config),
                       doctest::Contains("already complete"), EngineError);

  Trajectory empty;
  empty.task_id = task.id;
  empty.config = fx.config.snapshot();
  CHECK_THROWS_WITH_AS(resume_debate(task, empty, fx.config), doctest::Contains("empty prefix"),
                       EngineError);

  Trajectory wrong = full;
  wrong.rounds.resize(1);
  wrong.task_id = "someone-else";
  CHECK_THROWS_AS(resume_debate(task, wrong, fx.config), EngineError);
}

TEST_CASE("one_debate_round refuses to run past the last round") {
  Fixture fx;
  const Task& task = fx.corpus.tasks[0];
  Trajectory full = run_debate(task, fx.config);
  CHECK_THROWS_AS(one_debate_round(task, full, RoleGuidance::natural(),
                                   RoleGuidance::natural(), fx.config),
                  EngineError);
}

TEST_CASE("trajectory validation") {
  Trajectory trajectory;
  trajectory.task_id = "x";
  trajectory.config.total_rounds = 2;
  trajectory.rounds.push_back(RoundRecord{});
  trajectory.rounds.push_back(RoundRecord{});
  trajectory.rounds[1].index = 1;
  CHECK_NOTHROW(trajectory.validate());

  SUBCASE("non-contiguous indices") {
    trajectory.rounds[1].index = 2;
    CHECK_THROWS_AS(trajectory.validate(), EngineError);
  }
  SUBCASE("too many rounds") {
    trajectory.rounds.push_back(RoundRecord{});
    trajectory.rounds[2].index = 2;
    CHECK_THROWS_AS(trajectory.validate(), EngineError);
  }
  SUBCASE("empty task id") {
    trajectory.task_id.clear();
    CHECK_THROWS_AS(trajectory.validate(), EngineError);
  }
}

TEST_CASE("trajectory JSON round-trip is lossless") {
  Fixture fx;
  const Task& task = fx.corpus.tasks[2];
  Trajectory trajectory = run_debate(task, fx.config);

  json doc = trajectory_to_json(trajectory);
  Trajectory back = trajectory_from_json(doc);
  CHECK(trajectory_to_json(back).dump() == doc.dump());
  CHECK(back.rounds.size() == trajectory.rounds.size());
  CHECK(back.final_answer() == trajectory.final_answer());

  testsupport::TempDir dir;
  auto file = dir.file("traj.jsonl");
  write_trajectories(file, {trajectory, trajectory});
  auto loaded = read_trajectories(file);
  REQUIRE(loaded.size() == 2);
  CHECK(trajectory_to_json(loaded[1]).dump() == doc.dump());
}

TEST_CASE("trajectories without prompts serialize compactly") {
  Fixture fx;
  fx.config.keep_prompts = false;
  Trajectory trajectory = run_debate(fx.corpus.tasks[0], fx.config);
  json doc = trajectory_to_json(trajectory);
  CHECK_FALSE(doc["rounds"][0].contains("actor_prompt"));
  Trajectory back = trajectory_from_json(doc);
  CHECK_FALSE(back.rounds[0].actor_prompt.has_value());
}

TEST_CASE("final_answer_correct compares against the gold key") {
  Fixture fx;
  Task task = fx.corpus.tasks[0];
  Trajectory trajectory = run_debate(task, fx.config);
  bool correct = final_answer_correct(task, trajectory);
  REQUIRE(trajectory.final_answer().has_value());
  CHECK(correct == (trajectory.final_answer()->value == task.answer.value));

  Trajectory empty;
  empty.task_id = task.id;
  empty.config = fx.config.snapshot();
  CHECK_FALSE(final_answer_correct(task, empty));
}

TEST_CASE("debate config validation") {
  DebateConfig config;
  CHECK_THROWS_AS(config.validate(), EngineError);  // missing backends
  Fixture fx;
  fx.config.total_rounds = 0;
  CHECK_THROWS_AS(fx.config.validate(), EngineError);
}

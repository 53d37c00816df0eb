#include <cmath>
#include <vector>

#include "doctest.h"
#include "support.hpp"

#include "debatekit/errors.hpp"
#include "debatekit/evalharness.hpp"
#include "debatekit/scripted_backend.hpp"

using namespace debatekit;
using testsupport::yes_no_corpus;

namespace {

ScriptedAgentParams make_params(double p0, double s, double c) {
  ScriptedAgentParams params;
  params.p0 = p0;
  params.s = s;
  params.c = c;
  params.seed = 4;
  return params;
}

}  // namespace

TEST_CASE("evaluate_run scores every task and round") {
  Corpus corpus = yes_no_corpus(6);
  ScriptedBackend backend(make_params(1.0, 0.0, 0.5), corpus.tasks);
  DebateConfig config;
  config.actor = &backend;
  config.critic = &backend;
  config.total_rounds = 4;
  config.seed = 2;

  RunResult result = evaluate_run(corpus, config);
  CHECK(result.seed == 2);
  CHECK(result.total_rounds == 4);
  REQUIRE(result.task_ids.size() == 6);
  REQUIRE(result.per_round_correct.size() == 6);
  CHECK(result.failed_tasks.empty());
  CHECK(result.trajectories.size() == 6);

  // p0 = 1 and s = 0: always correct, never moves.
  for (const auto& rounds : result.per_round_correct) {
    REQUIRE(rounds.size() == 4);
    for (bool correct : rounds) CHECK(correct);
  }
  auto accuracy = round_accuracy(result);
  REQUIRE(accuracy.size() == 4);
  for (double a : accuracy) CHECK(a == 1.0);
}

TEST_CASE("failed tasks count as incorrect but stay in the denominator") {
  Corpus corpus = yes_no_corpus(12);
  Corpus known = corpus;
  known.tasks.pop_back();
  ScriptedBackend backend(make_params(1.0, 0.0, 0.5), known.tasks);
  DebateConfig config;
  config.actor = &backend;
  config.critic = &backend;
  config.total_rounds = 3;
  config.seed = 2;

  RunResult result = evaluate_run(corpus, config);
  REQUIRE(result.failed_tasks.size() == 1);
  CHECK(result.per_round_correct.size() == 12);
  CHECK(result.trajectories.size() == 11);
  auto accuracy = round_accuracy(result);
  for (double a : accuracy) CHECK(a == doctest::Approx(11.0 / 12.0));

  SUBCASE("more than ten percent failing aborts the run") {
    known.tasks.pop_back();
    ScriptedBackend smaller(make_params(1.0, 0.0, 0.5), known.tasks);
    config.actor = &smaller;
    config.critic = &smaller;
    CHECK_THROWS_AS(evaluate_run(corpus, config), EvalError);
  }
}

TEST_CASE("evaluate runs consecutive seeds") {
  Corpus corpus = yes_no_corpus(4);
  ScriptedBackend backend(make_params(0.6, 0.5, 0.7), corpus.tasks);
  DebateConfig config;
  config.actor = &backend;
  config.critic = &backend;
  config.total_rounds = 3;
  config.seed = 10;

  auto results = evaluate(corpus, config, 3);
  REQUIRE(results.size() == 3);
  CHECK(results[0].seed == 10);
  CHECK(results[1].seed == 11);
  CHECK(results[2].seed == 12);
  CHECK_THROWS_AS(evaluate(corpus, config, 0), EvalError);
}

TEST_CASE("results rebuilt from trajectories agree with the live run") {
  Corpus corpus = yes_no_corpus(5);
  ScriptedBackend backend(make_params(0.6, 0.5, 0.7), corpus.tasks);
  DebateConfig config;
  config.actor = &backend;
  config.critic = &backend;
  config.total_rounds = 4;
  config.seed = 3;

  RunResult live = evaluate_run(corpus, config);
  RunResult rebuilt = result_from_trajectories(corpus, live.trajectories, config.seed);
  REQUIRE(rebuilt.per_round_correct.size() == live.per_round_correct.size());
  for (std::size_t i = 0; i < live.per_round_correct.size(); ++i)
    CHECK(rebuilt.per_round_correct[i] == live.per_round_correct[i]);
  CHECK(round_accuracy(rebuilt) == round_accuracy(live));

  SUBCASE("unknown task ids are an error") {
    Corpus other = yes_no_corpus(5, "different");
    CHECK_THROWS_AS(result_from_trajectories(other, live.trajectories, 3), EvalError);
  }
}

TEST_CASE("confidence interval reference value") {
  std::vector<double> values = {0.88, 0.89, 0.90};
  Ci ci = confidence_interval(values);
  CHECK(std::abs(ci.mean - 0.89) < 1e-12);
  // sample stddev = 0.01; 1.96 * 0.01 / sqrt(3)
  CHECK(std::abs(ci.halfwidth - 0.011316) < 1e-4);

  std::vector<double> one = {0.5};
  CHECK_THROWS_AS(confidence_interval(one), EvalError);
}

TEST_CASE("interval halfwidth shrinks like one over sqrt n") {
  // Values constructed so every set has sample stddev exactly 0.1.
  auto values_with_stddev = [](int n) {
    double d = 0.1 * std::sqrt((n - 1.0) / n);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) values.push_back(i < n / 2 ? 0.5 - d : 0.5 + d);
    return values;
  };
  Ci at2 = confidence_interval(values_with_stddev(2));
  Ci at8 = confidence_interval(values_with_stddev(8));
  CHECK(at2.mean == doctest::Approx(0.5));
  CHECK(at8.mean == doctest::Approx(0.5));
  CHECK(at2.halfwidth / at8.halfwidth == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("percent improvement") {
  CHECK(std::abs(percent_improvement(0.8, 0.88) - 0.10) < 1e-12);
  CHECK(percent_improvement(0.5, 0.25) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(percent_improvement(0.0, 0.5), EvalError);
}

TEST_CASE("summarize aggregates runs into per-round intervals") {
  // Two synthetic runs over 4 tasks and 2 rounds.
  RunResult a;
  a.seed = 0;
  a.total_rounds = 2;
  a.task_ids = {"t0", "t1", "t2", "t3"};
  a.per_round_correct = {{true, true}, {true, true}, {false, true}, {false, false}};
  RunResult b = a;
  b.seed = 1;
  b.per_round_correct = {{true, true}, {true, true}, {true, true}, {false, false}};

  Summary summary = summarize({a, b});
  CHECK(summary.seeds == 2);
  CHECK(summary.rounds == 2);
  // Round 0: 0.5 and 0.75; round 1: 0.75 and 0.75.
  CHECK(summary.accuracy[0] == doctest::Approx(0.625));
  CHECK(summary.accuracy[1] == doctest::Approx(0.75));
  CHECK(summary.halfwidth[1] == doctest::Approx(0.0));
  CHECK(summary.halfwidth[0] > 0.0);
  REQUIRE(summary.improvement.has_value());
  CHECK(*summary.improvement == doctest::Approx(0.2));
  CHECK(summary.footer == "95% confidence intervals are computed across 2 seeded runs "
                          "(normal approximation).");

  SUBCASE("single run summaries have zero halfwidth") {
    Summary solo = summarize({a});
    CHECK(solo.seeds == 1);
    CHECK(solo.halfwidth[0] == 0.0);
  }
  SUBCASE("zero first-round accuracy leaves improvement undefined") {
    RunResult zero = a;
    for (auto& rounds : zero.per_round_correct) rounds[0] = false;
    RunResult zero2 = b;
    for (auto& rounds : zero2.per_round_correct) rounds[0] = false;
    Summary undef = summarize({zero, zero2});
    CHECK_FALSE(undef.improvement.has_value());
    CHECK(format_summary_table(undef).find("undefined") != std::string::npos);
  }
  SUBCASE("mismatched round counts refuse to aggregate") {
    RunResult longer = a;
    longer.total_rounds = 3;
    CHECK_THROWS_AS(summarize({a, longer}), EvalError);
  }
}

TEST_CASE("summary rendering") {
  RunResult a;
  a.seed = 0;
  a.total_rounds = 2;
  a.task_ids = {"t0", "t1"};
  a.per_round_correct = {{true, true}, {false, true}};
  Summary summary = summarize({a});

  std::string table = format_summary_table(summary);
  CHECK(table.find("round  accuracy  ci95") == 0);
  CHECK(table.find("0.5000") != std::string::npos);
  CHECK(table.find("1.0000") != std::string::npos);
  CHECK(table.find("improvement (last vs first): 100.00%") != std::string::npos);
  CHECK(table.find("95% confidence intervals") != std::string::npos);

  json doc = summary_to_json(summary);
  CHECK(doc["seeds"] == 1);
  CHECK(doc["rounds"].size() == 2);
  CHECK(doc["rounds"][0]["accuracy"] == 0.5);
  CHECK(doc["improvement"] == 1.0);
  CHECK(doc["footer"].get<std::string>().find("seeded runs") != std::string::npos);
}

TEST_CASE("unparseable responses count as incorrect") {
  // A backend that never commits to an answer.
  class Mumbler : public Backend {
   public:
    std::string id() const override { return "mumbler"; }
    GenerationResult generate(const GenerationRequest& request) override {
      request.validate();
      return GenerationResult{"Let me mull over the passage instead.", std::nullopt, id()};
    }
  };
  Corpus corpus = yes_no_corpus(3);
  Mumbler backend;
  DebateConfig config;
  config.actor = &backend;
  config.critic = &backend;
  config.total_rounds = 2;

  RunResult result = evaluate_run(corpus, config);
  CHECK(result.failed_tasks.empty());
  for (const auto& rounds : result.per_round_correct) {
    for (bool correct : rounds) CHECK_FALSE(correct);
  }
  for (const auto& trajectory : result.trajectories) {
    for (const auto& round : trajectory.rounds) CHECK_FALSE(round.actor_answer.has_value());
  }
}

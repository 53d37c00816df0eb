#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "debatekit/engine.hpp"

namespace debatekit {

/// Per-seed evaluation outcome. Failed tasks stay in the accuracy denominator
/// with every round counted incorrect.
struct RunResult {
  std::uint64_t seed = 0;
  int total_rounds = 0;
  std::vector<std::string> task_ids;
  std::vector<std::vector<bool>> per_round_correct;  // [task][round]
  std::vector<std::string> failed_tasks;
  std::vector<Trajectory> trajectories;  // successful tasks only
};

/// Debates every task once with config.seed. Aborts when more than 10% of
/// tasks fail.
RunResult evaluate_run(const Corpus& corpus, const DebateConfig& config);

/// Runs n_seeds evaluations with seeds config.seed, config.seed + 1, ...
std::vector<RunResult> evaluate(const Corpus& corpus, const DebateConfig& config, int n_seeds);

/// Rebuilds a result from persisted trajectories by re-extracting every
/// round's answer from the recorded actor text.
RunResult result_from_trajectories(const Corpus& corpus,
                                   const std::vector<Trajectory>& trajectories,
                                   std::uint64_t seed);

/// Fraction of tasks answered correctly at each round index.
std::vector<double> round_accuracy(const RunResult& result);

struct Ci {
  double mean = 0.0;
  double halfwidth = 0.0;
};

/// Normal-approximation 95% interval (1.96 standard errors) over independent
/// run-level values; requires at least two values.
Ci confidence_interval(std::span<const double> values);

/// Relative accuracy change (last - first) / first; the first-round accuracy
/// must be positive.
double percent_improvement(double first, double last);

struct Summary {
  int seeds = 0;
  int rounds = 0;
  std::vector<double> accuracy;    // per round, averaged over seeds
  std::vector<double> halfwidth;   // per round; zero when seeds < 2
  std::optional<double> improvement;  // absent when first-round accuracy is 0
  std::string footer;
};

Summary summarize(const std::vector<RunResult>& results);

std::string format_summary_table(const Summary& summary);
json summary_to_json(const Summary& summary);

}  // namespace debatekit

#include "debatekit/evalharness.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "debatekit/errors.hpp"

namespace debatekit {

namespace {

constexpr double kZ95 = 1.96;

void check_failure_budget(const RunResult& result) {
  if (result.failed_tasks.size() * 10 > result.task_ids.size()) {
    throw EvalError("evaluation aborted: " + std::to_string(result.failed_tasks.size()) +
                    " of " + std::to_string(result.task_ids.size()) + " tasks failed");
  }
}

}  // namespace

RunResult evaluate_run(const Corpus& corpus, const DebateConfig& config) {
  config.validate();
  RunResult result;
  result.seed = config.seed;
  result.total_rounds = config.total_rounds;
  for (const auto& task : corpus.tasks) {
    result.task_ids.push_back(task.id);
    try {
      Trajectory trajectory = run_debate(task, config);
      std::vector<bool> correct;
      correct.reserve(trajectory.rounds.size());
      for (const auto& round : trajectory.rounds)
        correct.push_back(round.actor_answer && *round.actor_answer == task.answer);
      result.per_round_correct.push_back(std::move(correct));
      result.trajectories.push_back(std::move(trajectory));
    } catch (const Error& e) {
      result.per_round_correct.emplace_back(config.total_rounds, false);
      result.failed_tasks.push_back(task.id + ": " + e.what());
    }
  }
  check_failure_budget(result);
  return result;
}

std::vector<RunResult> evaluate(const Corpus& corpus, const DebateConfig& config, int n_seeds) {
  if (n_seeds < 1) throw EvalError("n_seeds must be >= 1");
  std::vector<RunResult> results;
  results.reserve(static_cast<std::size_t>(n_seeds));
  for (int i = 0; i < n_seeds; ++i) {
    DebateConfig seeded = config;
    seeded.seed = config.seed + static_cast<std::uint64_t>(i);
    results.push_back(evaluate_run(corpus, seeded));
  }
  return results;
}

RunResult result_from_trajectories(const Corpus& corpus,
                                   const std::vector<Trajectory>& trajectories,
                                   std::uint64_t seed) {
  std::unordered_map<std::string, const Task*> by_id;
  for (const auto& task : corpus.tasks) by_id[task.id] = &task;

  RunResult result;
  result.seed = seed;
  for (const auto& trajectory : trajectories) {
    auto it = by_id.find(trajectory.task_id);
    if (it == by_id.end())
      throw EvalError("trajectory task '" + trajectory.task_id + "' not found in corpus");
    const Task& task = *it->second;
    result.total_rounds = std::max(result.total_rounds, trajectory.config.total_rounds);
    result.task_ids.push_back(trajectory.task_id);
    std::vector<bool> correct(static_cast<std::size_t>(trajectory.config.total_rounds), false);
    for (const auto& round : trajectory.rounds) {
      auto answer = extract_answer(round.actor_text, answer_kind(task.kind));
      correct[static_cast<std::size_t>(round.index)] = answer && *answer == task.answer;
    }
    result.per_round_correct.push_back(std::move(correct));
    result.trajectories.push_back(trajectory);
  }
  return result;
}

std::vector<double> round_accuracy(const RunResult& result) {
  if (result.per_round_correct.empty()) throw EvalError("run has no tasks");
  std::vector<double> accuracy(static_cast<std::size_t>(result.total_rounds), 0.0);
  for (const auto& task_rounds : result.per_round_correct) {
    for (std::size_t r = 0; r < task_rounds.size() && r < accuracy.size(); ++r) {
      if (task_rounds[r]) accuracy[r] += 1.0;
    }
  }
  for (auto& a : accuracy) a /= static_cast<double>(result.per_round_correct.size());
  return accuracy;
}

Ci confidence_interval(std::span<const double> values) {
  if (values.size() < 2)
    throw EvalError("confidence interval needs at least two run-level values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double stddev = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
  return Ci{mean, kZ95 * stddev / std::sqrt(static_cast<double>(values.size()))};
}

double percent_improvement(double first, double last) {
  if (!(first > 0.0))
    throw EvalError("percent improvement undefined: first-round accuracy is zero");
  // Work in percentage points: accuracies are decimal fractions, and scaling
  // by 100 makes two-decimal inputs exact, so 0.80 -> 0.88 yields exactly 0.1.
  return (last * 100.0 - first * 100.0) / (first * 100.0);
}

Summary summarize(const std::vector<RunResult>& results) {
  if (results.empty()) throw EvalError("summarize: no runs");
  Summary summary;
  summary.seeds = static_cast<int>(results.size());
  summary.rounds = results.front().total_rounds;
  for (const auto& r : results) {
    if (r.total_rounds != summary.rounds)
      throw EvalError("summarize: runs disagree on total_rounds");
  }

  std::vector<std::vector<double>> per_run;
  per_run.reserve(results.size());
  for (const auto& r : results) per_run.push_back(round_accuracy(r));

  for (int round = 0; round < summary.rounds; ++round) {
    std::vector<double> values;
    values.reserve(per_run.size());
    for (const auto& accs : per_run) values.push_back(accs[static_cast<std::size_t>(round)]);
    if (values.size() >= 2) {
      Ci ci = confidence_interval(values);
      summary.accuracy.push_back(ci.mean);
      summary.halfwidth.push_back(ci.halfwidth);
    } else {
      summary.accuracy.push_back(values.front());
      summary.halfwidth.push_back(0.0);
    }
  }
  if (summary.accuracy.front() > 0.0) {
    summary.improvement =
        percent_improvement(summary.accuracy.front(), summary.accuracy.back());
  }
  summary.footer = "95% confidence intervals are computed across " +
                   std::to_string(summary.seeds) +
                   " seeded runs (normal approximation).";
  return summary;
}

std::string format_summary_table(const Summary& summary) {
  std::ostringstream out;
  out << "round  accuracy  ci95\n";
  for (int r = 0; r < summary.rounds; ++r) {
    out << std::left << std::setw(7) << r << std::fixed << std::setprecision(4)
        << std::setw(10) << summary.accuracy[static_cast<std::size_t>(r)];
    out << "+/-" << std::fixed << std::setprecision(4)
        << summary.halfwidth[static_cast<std::size_t>(r)] << "\n";
  }
  if (summary.improvement) {
    out << "improvement (last vs first): " << std::fixed << std::setprecision(2)
        << (*summary.improvement * 100.0) << "%\n";
  } else {
    out << "improvement (last vs first): undefined (first-round accuracy is 0)\n";
  }
  out << summary.footer << "\n";
  return out.str();
}

json summary_to_json(const Summary& summary) {
  json doc;
  doc["seeds"] = summary.seeds;
  json rounds = json::array();
  for (int r = 0; r < summary.rounds; ++r) {
    rounds.push_back({{"round", r},
                      {"accuracy", summary.accuracy[static_cast<std::size_t>(r)]},
                      {"ci95", summary.halfwidth[static_cast<std::size_t>(r)]}});
  }
  doc["rounds"] = std::move(rounds);
  doc["improvement"] = summary.improvement ? json(*summary.improvement) : json(nullptr);
  doc["footer"] = summary.footer;
  return doc;
}

}  // namespace debatekit

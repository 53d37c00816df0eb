#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"

#include "debatekit/config.hpp"
#include "debatekit/dpo.hpp"
#include "debatekit/errors.hpp"
#include "debatekit/evalharness.hpp"
#include "debatekit/jsonl.hpp"
#include "debatekit/rewards.hpp"

namespace dk = debatekit;
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string backend_kind;
  std::string templates_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int rounds = 0;
  bool keep_prompts = false;
};

dk::RunConfig resolve_config(const CommonOptions& opts) {
  dk::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = dk::load_run_config(opts.config_path);
  if (!opts.backend_kind.empty()) {
    cfg.backend = dk::BackendSpec{};
    cfg.backend.kind = opts.backend_kind;
    cfg.critic_backend.reset();
  }
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.rounds > 0) cfg.total_rounds = opts.rounds;
  if (opts.keep_prompts) cfg.keep_prompts = true;
  if (!opts.templates_dir.empty()) cfg.templates_dir = opts.templates_dir;
  return cfg;
}

/// Owns the backends and template set a DebateConfig points into.
struct Session {
  dk::RunConfig cfg;
  std::unique_ptr<dk::Backend> actor;
  std::unique_ptr<dk::Backend> critic;
  std::optional<dk::TemplateSet> templates;
  dk::DebateConfig debate;

  Session(dk::RunConfig run_config, const dk::Corpus& corpus) : cfg(std::move(run_config)) {
    actor = dk::make_backend(cfg.backend, corpus.tasks);
    critic = dk::make_backend(cfg.critic_backend ? *cfg.critic_backend : cfg.backend,
                              corpus.tasks);
    if (!cfg.templates_dir.empty())
      templates = dk::TemplateSet::from_directory(cfg.templates_dir);
    debate.actor = actor.get();
    debate.critic = critic.get();
    debate.total_rounds = cfg.total_rounds;
    debate.temperature_debate = cfg.temperature_debate;
    debate.temperature_rollout = cfg.temperature_rollout;
    debate.max_tokens = cfg.max_tokens;
    debate.seed = cfg.seed;
    debate.keep_prompts = cfg.keep_prompts;
    debate.templates = templates ? &*templates : nullptr;
  }
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_rounds = true) {
  cmd->add_option("--config", opts.config_path, "JSON run-configuration file");
  cmd->add_option("--backend", opts.backend_kind, "Backend kind (scripted or remote)")
      ->check(CLI::IsMember({"scripted", "remote"}));
  cmd->add_option("--templates-dir", opts.templates_dir, "Prompt template override directory");
  auto* seed = cmd->add_option("--seed", opts.seed, "Run seed");
  seed->each([&opts](const std::string&) { opts.seed_set = true; });
  if (with_rounds)
    cmd->add_option("--rounds", opts.rounds, "Debate rounds per task")->check(CLI::PositiveNumber);
}

fs::path seeded_path(const fs::path& base, std::uint64_t seed) {
  fs::path out = base;
  out.replace_filename(base.stem().string() + "-seed" + std::to_string(seed) +
                       base.extension().string());
  return out;
}

void write_json_file(const fs::path& path, const dk::json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw dk::Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

int run_app(int argc, char** argv) {
  CLI::App app{"Actor-critic debate pipeline: corpora, debates, preference data, loss reports"};
  app.require_subcommand(1);

  // corpus convert
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus conversion and splitting");
  corpus_cmd->require_subcommand(1);
  auto* convert = corpus_cmd->add_subcommand("convert", "Convert a raw JSONL source");
  std::string in_path, out_path, format = "boolq_like", corpus_name;
  CommonOptions convert_opts;
  convert->add_option("--in", in_path, "Source JSONL file")->required();
  convert->add_option("--out", out_path, "Canonical JSONL output")->required();
  convert->add_option("--format", format, "Source format")
      ->check(CLI::IsMember({"boolq_like", "mc_like"}));
  convert->add_option("--name", corpus_name, "Corpus name (default: file stem)");
  convert->add_option("--config", convert_opts.config_path, "JSON run-configuration file");
  convert->callback([&] {
    dk::RunConfig cfg;
    if (!convert_opts.config_path.empty()) cfg = dk::load_run_config(convert_opts.config_path);
    auto corpus = dk::load_corpus(in_path, dk::source_format_from_string(format), cfg.fields,
                                  corpus_name);
    dk::save_corpus(corpus, out_path);
    std::cout << "wrote " << corpus.tasks.size() << " tasks to " << out_path << "\n";
  });

  auto* split = corpus_cmd->add_subcommand("split", "Seeded train/validation/test split");
  std::string split_in, split_dir;
  double frac_test = 0.25, frac_val = 0.10;
  std::uint64_t split_seed = 0;
  split->add_option("--in", split_in, "Canonical JSONL corpus")->required();
  split->add_option("--out-dir", split_dir, "Output directory")->required();
  split->add_option("--test", frac_test, "Test fraction");
  split->add_option("--validation", frac_val, "Validation fraction");
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->callback([&] {
    auto corpus = dk::load_canonical(split_in);
    auto splits = dk::split_corpus(corpus, {frac_test, frac_val}, split_seed);
    fs::create_directories(split_dir);
    dk::save_corpus(splits.train, fs::path(split_dir) / "train.jsonl");
    dk::save_corpus(splits.validation, fs::path(split_dir) / "validation.jsonl");
    dk::save_corpus(splits.test, fs::path(split_dir) / "test.jsonl");
    std::cout << "train=" << splits.train.tasks.size()
              << " validation=" << splits.validation.tasks.size()
              << " test=" << splits.test.tasks.size() << "\n";
  });

  // debate run
  auto* debate_cmd = app.add_subcommand("debate", "Run debates");
  debate_cmd->require_subcommand(1);
  auto* debate_run = debate_cmd->add_subcommand("run", "Debate every task and report accuracy");
  std::string debate_corpus, debate_out;
  int n_seeds = 1;
  CommonOptions debate_opts;
  debate_run->add_option("--corpus", debate_corpus, "Canonical JSONL corpus")->required();
  debate_run->add_option("--out", debate_out, "Trajectory JSONL output")->required();
  debate_run->add_option("--seeds", n_seeds, "Number of seeded runs")
      ->check(CLI::PositiveNumber);
  debate_run->add_flag("--keep-prompts", debate_opts.keep_prompts,
                       "Record prompts inside trajectories");
  add_common(debate_run, debate_opts);
  debate_run->callback([&] {
    auto corpus = dk::load_canonical(debate_corpus);
    Session session(resolve_config(debate_opts), corpus);
    auto results = dk::evaluate(corpus, session.debate, n_seeds);
    for (const auto& result : results) {
      fs::path out = n_seeds == 1 ? fs::path(debate_out)
                                  : seeded_path(fs::path(debate_out), result.seed);
      dk::write_trajectories(out, result.trajectories);
      for (const auto& failure : result.failed_tasks)
        std::cerr << "task failed (seed " << result.seed << "): " << failure << "\n";
    }
    std::cout << dk::format_summary_table(dk::summarize(results));
  });

  // data generate
  auto* data_cmd = app.add_subcommand("data", "Preference-pair dataset generation");
  data_cmd->require_subcommand(1);
  auto* generate = data_cmd->add_subcommand("generate", "Guided-probe preference dataset");
  std::string gen_corpus, gen_out;
  double gen_epsilon = -1.0;
  int gen_rollouts = 0;
  std::vector<int> gen_probes;
  std::string gen_roles;
  CommonOptions gen_opts;
  generate->add_option("--corpus", gen_corpus, "Canonical JSONL corpus")->required();
  generate->add_option("--out", gen_out, "Dataset JSONL output")->required();
  generate->add_option("--epsilon", gen_epsilon, "Selection threshold");
  generate->add_option("--rollouts", gen_rollouts, "Monte-Carlo rollouts per branch");
  generate->add_option("--probe", gen_probes, "Round indices to probe (repeatable)");
  generate->add_option("--target-roles", gen_roles, "both, actor_only, or critic_only")
      ->check(CLI::IsMember({"both", "actor_only", "critic_only"}));
  add_common(generate, gen_opts);
  generate->callback([&] {
    auto corpus = dk::load_canonical(gen_corpus);
    auto cfg = resolve_config(gen_opts);
    if (gen_epsilon > 0) cfg.plan.epsilon = gen_epsilon;
    if (gen_rollouts > 0) cfg.plan.rollouts = gen_rollouts;
    if (!gen_probes.empty()) cfg.plan.rounds_to_probe = gen_probes;
    if (!gen_roles.empty()) cfg.plan.target_roles = dk::target_roles_from_string(gen_roles);
    cfg.plan.seed = cfg.seed;
    Session session(cfg, corpus);
    auto dataset = dk::generate_trajectory_dataset(corpus, cfg.plan, session.debate);
    dk::write_dataset(gen_out, dataset);
    for (const auto& failure : dataset.header.failed_tasks)
      std::cerr << "task failed: " << failure << "\n";
    std::cout << "wrote " << dataset.pairs.size() << " pairs to " << gen_out << "\n";
  });

  // phases run
  auto* phases_cmd = app.add_subcommand("phases", "Iterative best-response phases");
  phases_cmd->require_subcommand(1);
  auto* phases_run = phases_cmd->add_subcommand(
      "run", "Critic-phase then actor-phase preference datasets");
  std::string phases_corpus, phases_dir, phase_choice = "both";
  CommonOptions phases_opts;
  phases_run->add_option("--corpus", phases_corpus, "Canonical JSONL corpus")->required();
  phases_run->add_option("--out-dir", phases_dir, "Output directory")->required();
  phases_run->add_option("--phase", phase_choice, "Which phase(s) to run")
      ->check(CLI::IsMember({"both", "critic", "actor"}));
  add_common(phases_run, phases_opts);
  phases_run->callback([&] {
    auto corpus = dk::load_canonical(phases_corpus);
    auto cfg = resolve_config(phases_opts);
    cfg.plan.seed = cfg.seed;
    Session session(cfg, corpus);
    fs::create_directories(phases_dir);
    fs::path critic_out = fs::path(phases_dir) / "critic_pairs.jsonl";
    fs::path actor_out = fs::path(phases_dir) / "actor_pairs.jsonl";

    if (phase_choice == "actor" && !fs::exists(critic_out)) {
      std::cerr << "warning: actor phase requested but no critic-phase dataset at "
                << critic_out.string() << "; running out of order\n";
    }
    if (phase_choice != "actor") {
      auto ds = dk::generate_trajectory_dataset(corpus, cfg.plan, session.debate,
                                                dk::Phase::critic_phase);
      dk::write_dataset(critic_out, ds);
      std::cout << "critic phase: " << ds.pairs.size() << " pairs -> " << critic_out.string()
                << "\n";
    }
    if (phase_choice != "critic") {
      auto ds = dk::generate_trajectory_dataset(corpus, cfg.plan, session.debate,
                                                dk::Phase::actor_phase);
      dk::write_dataset(actor_out, ds);
      std::cout << "actor phase: " << ds.pairs.size() << " pairs -> " << actor_out.string()
                << "\n";
    }
  });

  // loss eval / check
  auto* loss_cmd = app.add_subcommand("loss", "Preference-loss evaluation");
  loss_cmd->require_subcommand(1);
  auto* loss_eval = loss_cmd->add_subcommand("eval", "Join a dataset with scores and report");
  std::string pairs_path, scores_path, report_out;
  dk::DpoParams loss_params;
  loss_eval->add_option("--pairs", pairs_path, "Preference dataset JSONL")->required();
  loss_eval->add_option("--scores", scores_path, "Per-pair score JSONL")->required();
  loss_eval->add_option("--beta", loss_params.beta, "DPO temperature");
  loss_eval->add_option("--nll-weight", loss_params.nll_weight, "NLL regularizer weight");
  loss_eval->add_option("--out", report_out, "Write the report as JSON");
  loss_eval->callback([&] {
    auto dataset = dk::read_dataset(pairs_path);
    std::unordered_map<std::string, dk::ScoredPair> scores;
    dk::for_each_jsonl(scores_path, [&](std::size_t line, const dk::json& doc) {
      dk::ScoredPair sp;
      std::string id;
      try {
        id = doc.at("pair_id").get<std::string>();
        sp.logp_policy_chosen = doc.at("logp_policy_chosen").get<double>();
        sp.logp_policy_rejected = doc.at("logp_policy_rejected").get<double>();
        sp.logp_ref_chosen = doc.at("logp_ref_chosen").get<double>();
        sp.logp_ref_rejected = doc.at("logp_ref_rejected").get<double>();
        sp.chosen_token_count = doc.at("chosen_token_count").get<int>();
      } catch (const nlohmann::json::exception& e) {
        throw dk::LossError(scores_path + ":" + std::to_string(line) +
                            ": malformed score record: " + e.what());
      }
      sp.validate();
      scores[id] = sp;
    });
    std::vector<dk::ScoredPair> joined;
    std::vector<std::string> missing;
    for (const auto& pair : dataset.pairs) {
      auto it = scores.find(pair.pair_id);
      if (it == scores.end()) {
        missing.push_back(pair.pair_id);
      } else {
        joined.push_back(it->second);
      }
    }
    if (!missing.empty()) {
      std::string msg = "missing scores for " + std::to_string(missing.size()) + " pairs:";
      for (std::size_t i = 0; i < missing.size() && i < 5; ++i) msg += " " + missing[i];
      throw dk::LossError(msg);
    }
    auto summary = dk::batch_report(joined, loss_params);
    std::cout << "pairs:            " << summary.count << "\n"
              << "mean dpo loss:    " << summary.mean_dpo_loss << "\n"
              << "mean total loss:  " << summary.mean_total_loss << "\n"
              << "mean margin:      " << summary.mean_margin << "\n"
              << "margin > 0:       " << summary.fraction_margin_positive << "\n";
    if (!report_out.empty()) {
      dk::json doc;
      doc["beta"] = loss_params.beta;
      doc["nll_weight"] = loss_params.nll_weight;
      doc["count"] = summary.count;
      doc["mean_dpo_loss"] = summary.mean_dpo_loss;
      doc["mean_total_loss"] = summary.mean_total_loss;
      doc["mean_margin"] = summary.mean_margin;
      doc["fraction_margin_positive"] = summary.fraction_margin_positive;
      write_json_file(report_out, doc);
    }
  });

  auto* loss_check = loss_cmd->add_subcommand("check", "Analytic-vs-numeric gradient check");
  dk::DpoParams check_params;
  double check_lo = -10.0, check_hi = 10.0, check_step = 0.25;
  loss_check->add_option("--beta", check_params.beta, "DPO temperature");
  loss_check->add_option("--lo", check_lo, "Grid lower bound");
  loss_check->add_option("--hi", check_hi, "Grid upper bound");
  loss_check->add_option("--step", check_step, "Grid step");
  loss_check->callback([&] {
    double deviation = dk::gradient_check(check_params, check_lo, check_hi, check_step);
    bool ok = deviation < 1e-6;
    std::cout << "gradient check max deviation: " << deviation << (ok ? " (ok)" : " (FAIL)")
              << "\n";
    if (!ok) throw dk::LossError("gradient check deviation exceeds 1e-6");
  });

  // report
  auto* report = app.add_subcommand("report", "Per-round accuracy from saved trajectories");
  std::string report_corpus, report_json;
  std::vector<std::string> trajectory_files;
  report->add_option("--corpus", report_corpus, "Canonical JSONL corpus")->required();
  report->add_option("--trajectories", trajectory_files, "Trajectory JSONL files, one per seed")
      ->required();
  report->add_option("--out", report_json, "Write the summary as JSON");
  report->callback([&] {
    auto corpus = dk::load_canonical(report_corpus);
    std::vector<dk::RunResult> results;
    for (const auto& file : trajectory_files) {
      auto trajectories = dk::read_trajectories(file);
      if (trajectories.empty()) throw dk::EvalError(file + ": no trajectories");
      results.push_back(
          dk::result_from_trajectories(corpus, trajectories, trajectories.front().config.seed));
    }
    auto summary = dk::summarize(results);
    std::cout << dk::format_summary_table(summary);
    if (!report_json.empty()) write_json_file(report_json, dk::summary_to_json(summary));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_app(argc, argv);
  } catch (const dk::Error& e) {
    dk::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    dk::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
}

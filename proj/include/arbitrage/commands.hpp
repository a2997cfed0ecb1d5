#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "arbitrage/config.hpp"
#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"
#include "arbitrage/eval.hpp"
#include "arbitrage/io.hpp"
#include "arbitrage/rewards.hpp"
#include "arbitrage/router.hpp"
#include "arbitrage/routing.hpp"
#include "arbitrage/teachers.hpp"

namespace arbitrage {

[[nodiscard]] inline std::unique_ptr<Scorer> make_scorer(const RunConfig& cfg) {
  if (cfg.reward_kind == "remote") {
    return std::make_unique<RemoteScorer>(cfg.reward_endpoint, cfg.reward_template,
                                          cfg.reward_response_path);
  }
  return std::make_unique<SimulatedScorer>();
}

[[nodiscard]] inline std::unique_ptr<Judge> make_judge(const RunConfig& cfg,
                                                       const Scorer& scorer) {
  if (cfg.judge_kind == "remote") {
    return std::make_unique<RemoteJudge>(cfg.judge_endpoint, cfg.judge_template,
                                         cfg.judge_response_path);
  }
  return std::make_unique<SimulatedJudge>(scorer, cfg.judge_margin);
}

namespace detail {

inline std::vector<Prompt> load_run_prompts(const RunConfig& cfg) {
  if (cfg.prompts_path.empty()) {
    throw ConfigError("config: paths.prompts is required for this command");
  }
  return io::load_prompts(
      cfg.prompts_path,
      std::set<std::string>(cfg.languages.begin(), cfg.languages.end()));
}

inline void write_generate_summary(const std::string& path, const RunConfig& cfg,
                                   const BuildResult& built, std::size_t n_prompts) {
  io::ordered_json j;
  j["run_seed"] = cfg.run_seed;
  j["config_digest"] = cfg.digest;
  j["strategy"] = std::string(to_string(cfg.strategy));
  j["n_prompts"] = n_prompts;
  j["n_samples"] = built.dataset.samples.size();
  j["n_failures"] = built.failures.size();
  io::ordered_json counts = io::ordered_json::object();
  for (const auto& [lang, samples] : partition_by_language(built.dataset)) {
    counts[lang] = samples.size();
  }
  j["language_counts"] = std::move(counts);
  io::ordered_json failures = io::ordered_json::array();
  for (const auto& f : built.failures) {
    failures.push_back({{"prompt_id", f.prompt_id}, {"reason", f.reason}});
  }
  j["failures"] = std::move(failures);
  io::write_text_file(path, j.dump(2) + "\n");
}

// Highest quality teacher per language, lowest pool index on ties.
[[nodiscard]] inline FixedRoutingTable oracle_table(
    const std::vector<TeacherSpec>& pool, const std::vector<std::string>& languages) {
  FixedRoutingTable table;
  for (const auto& lang : languages) {
    const TeacherSpec* best = nullptr;
    double best_q = 0.0;
    for (const auto& t : pool) {
      if (!t.supports(lang)) continue;
      const auto it = t.profile.quality.find(lang);
      if (it == t.profile.quality.end()) continue;
      if (best == nullptr || it->second > best_q) {
        best = &t;
        best_q = it->second;
      }
    }
    if (best == nullptr) {
      throw ConfigError("no simulated teacher covers language \"" + lang + "\"");
    }
    table.language_to_teacher[lang] = best->id;
  }
  return table;
}

}  // namespace detail

inline void cmd_generate(const RunConfig& cfg, std::ostream& out = std::cout) {
  const std::vector<Prompt> prompts = detail::load_run_prompts(cfg);

  std::unique_ptr<Scorer> scorer;
  RouterModel router;
  const FixedRoutingTable* table = nullptr;
  const RouterModel* router_ptr = nullptr;
  if (cfg.strategy == Strategy::kFixed) table = &cfg.table;
  if (cfg.strategy == Strategy::kReward) scorer = make_scorer(cfg);
  if (cfg.strategy == Strategy::kLearned) {
    router = load_router(cfg.router_path);
    router_ptr = &router;
  }

  BuildOptions options;
  options.failure_threshold = cfg.failure_threshold;
  options.workers = cfg.resolve_workers();
  BuildResult built = build_dataset(cfg.strategy, cfg.teachers, prompts, cfg.run_seed,
                                    scorer.get(), table, router_ptr, options);
  built.dataset.config_digest = cfg.digest;

  io::save_dataset(cfg.dataset_out, built.dataset);
  detail::write_generate_summary(cfg.dataset_out + ".summary.json", cfg, built,
                                 prompts.size());

  out << "wrote " << built.dataset.samples.size() << " samples to " << cfg.dataset_out
      << " (strategy " << to_string(cfg.strategy) << ", seed " << cfg.run_seed
      << ", config " << cfg.digest << ")\n";
  for (const auto& [lang, samples] : partition_by_language(built.dataset)) {
    out << "  " << lang << ": " << samples.size() << " samples\n";
  }
  out << "failures: " << built.failures.size() << "\n";
  for (const auto& f : built.failures) {
    out << "  " << f.prompt_id << ": " << f.reason << "\n";
  }
}

inline void cmd_train_router(const RunConfig& cfg, std::ostream& out = std::cout) {
  if (cfg.router_path.empty()) {
    throw ConfigError("config: routing.router_path is required for train-router");
  }
  const std::vector<Prompt> prompts = detail::load_run_prompts(cfg);
  const std::unique_ptr<Scorer> scorer = make_scorer(cfg);

  const CollectResult collected = collect_training_data(
      cfg.teachers, prompts, cfg.run_seed, *scorer, cfg.failure_threshold);
  out << "collected " << collected.examples.size() << " training examples ("
      << collected.failures.size() << " prompts skipped)\n";
  for (const auto& f : collected.failures) {
    out << "  " << f.prompt_id << ": " << f.reason << "\n";
  }

  const TrainResult trained = train(collected.examples, cfg.training);
  save_router(cfg.router_path, trained.model);

  const std::string trace_path = cfg.router_path + ".loss.csv";
  std::string trace = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < trained.epoch_loss.size(); ++e) {
    trace += std::to_string(e + 1);
    trace += ',';
    trace += detail::fmt(trained.epoch_loss[e]);
    trace += '\n';
  }
  io::write_text_file(trace_path, trace);

  out << "wrote router to " << cfg.router_path << " (seed " << cfg.run_seed
      << ", config " << cfg.digest << ")\n";
  out << "loss trace: " << trace_path << " (" << trained.epoch_loss.size()
      << " epochs, final " << detail::fmt(trained.epoch_loss.back()) << ")\n";
}

inline void cmd_eval(const RunConfig& cfg, const std::string& dataset_a,
                     const std::string& dataset_b, std::ostream& out = std::cout) {
  const Dataset a = io::load_dataset(dataset_a);
  const Dataset b = io::load_dataset(dataset_b);
  const std::unique_ptr<Scorer> scorer = make_scorer(cfg);
  const std::unique_ptr<Judge> judge = make_judge(cfg, *scorer);

  const WinRateReport report = run_pairwise_eval(a, b, *judge);

  std::filesystem::create_directories(cfg.reports_dir);
  const std::string base = cfg.reports_dir + "/winrate";
  write_winrate_csv(base + ".csv", report);
  write_winrate_jsonl(base + ".jsonl", report);
  write_winrate_text(base + ".txt", report);

  out << "judged " << report.overall.n_matches << " matches (config " << cfg.digest
      << "): win_rate_a " << detail::fmt(report.overall.win_rate_a) << "%, win_rate_b "
      << detail::fmt(report.overall.win_rate_b) << "%, diff "
      << detail::fmt(report.overall.win_loss_diff) << "%\n";
  if (report.unjudged > 0) {
    out << "unjudged matches excluded: " << report.unjudged << "\n";
  }
  out << "reports: " << base << ".{csv,jsonl,txt}\n";
}

inline void cmd_report(const RunConfig& cfg, const std::string& dataset_path,
                       std::ostream& out = std::cout) {
  const Dataset ds = io::load_dataset(dataset_path);

  const CompositionReport composition = composition_report(ds);
  std::map<std::string, std::vector<GroupedText>> by_teacher;
  for (const auto& s : ds.samples) {
    by_teacher[s.teacher_id].push_back(
        {s.prompt.id, s.prompt.language, s.completion.text});
  }
  const CharacteristicsReport characteristics =
      characteristics_report(by_teacher, cfg.mtld_threshold);
  const PromptStatsReport prompt_stats = routed_prompt_stats(ds);

  std::filesystem::create_directories(cfg.reports_dir);
  const std::string dir = cfg.reports_dir + "/";
  write_composition_jsonl(dir + "composition.jsonl", composition);
  write_composition_text(dir + "composition.txt", composition);
  write_characteristics_jsonl(dir + "characteristics.jsonl", characteristics);
  write_characteristics_text(dir + "characteristics.txt", characteristics);
  write_prompt_stats_jsonl(dir + "prompt_stats.jsonl", prompt_stats);
  write_prompt_stats_text(dir + "prompt_stats.txt", prompt_stats);

  out << "report over " << ds.samples.size() << " samples, " << composition.by_language.size()
      << " languages (config " << cfg.digest << ")\n";
  for (const auto& w : characteristics.warnings) out << "warning: " << w << "\n";
  for (const auto& w : prompt_stats.warnings) out << "warning: " << w << "\n";
  out << "reports: " << dir
      << "{composition,characteristics,prompt_stats}.{jsonl,txt}\n";
}

struct SimulateRow {
  std::string strategy;
  std::size_t n = 0;
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  double win_rate = 0.0;
  double diff = 0.0;
};

// Builds datasets under all four strategies from one prompt set and judges
// each against the random-routing baseline (the baseline row compares the
// random dataset with itself, which lands on all ties).
inline std::vector<SimulateRow> cmd_simulate(const RunConfig& cfg,
                                             std::ostream& out = std::cout) {
  for (const auto& t : cfg.teachers) {
    if (t.kind != TeacherKind::kSimulated) {
      throw ConfigError("simulate requires an all-simulated teacher pool (teacher \"" +
                        t.id + "\" is remote)");
    }
  }
  const std::vector<Prompt> prompts = detail::load_run_prompts(cfg);
  const SimulatedScorer scorer;
  const SimulatedJudge judge(scorer, cfg.judge_margin);

  const FixedRoutingTable table =
      cfg.has_table ? cfg.table : detail::oracle_table(cfg.teachers, cfg.languages);
  validate_table(table, cfg.teachers, cfg.languages);

  out << "training learned router on " << prompts.size() << " prompts...\n";
  const CollectResult collected = collect_training_data(
      cfg.teachers, prompts, cfg.run_seed, scorer, cfg.failure_threshold);
  const TrainResult trained = train(collected.examples, cfg.training);

  BuildOptions options;
  options.failure_threshold = cfg.failure_threshold;
  options.workers = cfg.resolve_workers();
  auto build = [&](Strategy strategy) {
    return build_dataset(strategy, cfg.teachers, prompts, cfg.run_seed, &scorer,
                         &table, &trained.model, options)
        .dataset;
  };
  const Dataset random_ds = build(Strategy::kRandom);

  std::vector<SimulateRow> rows;
  for (const Strategy strategy : {Strategy::kFixed, Strategy::kRandom,
                                  Strategy::kReward, Strategy::kLearned}) {
    const Dataset ds = strategy == Strategy::kRandom ? random_ds : build(strategy);
    const WinRateReport report = run_pairwise_eval(ds, random_ds, judge);
    SimulateRow row;
    row.strategy = std::string(to_string(strategy));
    row.n = report.overall.n_matches;
    row.wins = report.overall.wins_a;
    row.losses = report.overall.wins_b;
    row.ties = report.overall.ties;
    row.win_rate = report.overall.win_rate_a;
    row.diff = report.overall.win_loss_diff;
    rows.push_back(std::move(row));
  }

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"strategy", "n", "wins", "losses", "ties", "win_rate_vs_random",
                   "diff"});
  std::string jsonl;
  for (const auto& r : rows) {
    cells.push_back({r.strategy, std::to_string(r.n), std::to_string(r.wins),
                     std::to_string(r.losses), std::to_string(r.ties),
                     detail::fmt(r.win_rate), detail::fmt(r.diff)});
    io::ordered_json j;
    j["strategy"] = r.strategy;
    j["n"] = r.n;
    j["wins"] = r.wins;
    j["losses"] = r.losses;
    j["ties"] = r.ties;
    j["win_rate_vs_random"] = r.win_rate;
    j["diff"] = r.diff;
    jsonl += j.dump();
    jsonl += '\n';
  }
  const std::string summary = detail::aligned_table(cells);
  out << summary;
  out << "(seed " << cfg.run_seed << ", config " << cfg.digest << ")\n";

  std::filesystem::create_directories(cfg.reports_dir);
  io::write_text_file(cfg.reports_dir + "/simulate_summary.txt", summary);
  io::write_text_file(cfg.reports_dir + "/simulate_summary.jsonl", jsonl);
  return rows;
}

}  // namespace arbitrage

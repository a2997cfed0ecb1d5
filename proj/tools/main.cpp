#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "arbitrage/commands.hpp"
#include "arbitrage/config.hpp"
#include "arbitrage/errors.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::uint64_t seed = 0;
  std::string strategy;
  std::string out;
  std::size_t workers = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* strategy_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--config,-c", c.config,
                  "run config JSON (falls back to $ARBITRAGE_CONFIG)");
  c.seed_opt = sub->add_option("--seed", c.seed, "override run_seed");
  c.strategy_opt =
      sub->add_option("--strategy", c.strategy, "override routing strategy")
          ->check(CLI::IsMember({"fixed", "random", "reward", "learned"}));
  c.out_opt = sub->add_option("--out", c.out, "override dataset output path");
  c.workers_opt =
      sub->add_option("--workers", c.workers, "worker threads (0 = logical CPUs)");
}

arbitrage::RunConfig load_effective_config(const CommonOpts& c) {
  std::string path = c.config;
  if (path.empty()) {
    if (const char* env = std::getenv("ARBITRAGE_CONFIG")) path = env;
  }
  if (path.empty()) {
    throw arbitrage::ConfigError(
        "no config file: pass --config or set ARBITRAGE_CONFIG");
  }
  arbitrage::RunConfig cfg = arbitrage::load_config(path);
  arbitrage::Overrides overrides;
  if (c.seed_opt->count() > 0) overrides.seed = c.seed;
  if (c.strategy_opt->count() > 0) overrides.strategy = c.strategy;
  if (c.out_opt->count() > 0) overrides.out = c.out;
  if (c.workers_opt->count() > 0) overrides.workers = c.workers;
  arbitrage::apply_overrides(cfg, overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilingual arbitrage pipeline: route prompts across teacher "
               "models, assemble datasets, train and evaluate a learned router"};
  app.require_subcommand(1);

  CommonOpts generate_opts, train_opts, eval_opts, report_opts, simulate_opts;

  CLI::App* generate = app.add_subcommand("generate", "assemble a routed dataset");
  add_common(generate, generate_opts);

  CLI::App* train = app.add_subcommand(
      "train-router", "collect reward vectors and train the learned router");
  add_common(train, train_opts);

  CLI::App* eval = app.add_subcommand(
      "eval", "pairwise win-rate evaluation of two datasets");
  add_common(eval, eval_opts);
  std::string dataset_a, dataset_b;
  eval->add_option("dataset_a", dataset_a, "first dataset (JSONL)")->required();
  eval->add_option("dataset_b", dataset_b, "second dataset (JSONL)")->required();

  CLI::App* report = app.add_subcommand(
      "report", "composition, characteristics, and routed-prompt reports");
  add_common(report, report_opts);
  std::string dataset_path;
  report->add_option("dataset", dataset_path, "dataset to analyze (JSONL)")
      ->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "end-to-end strategy comparison on a simulated pool");
  add_common(simulate, simulate_opts);

  try {
    app.parse(argc, argv);

    if (app.got_subcommand(generate)) {
      arbitrage::cmd_generate(load_effective_config(generate_opts));
    } else if (app.got_subcommand(train)) {
      arbitrage::cmd_train_router(load_effective_config(train_opts));
    } else if (app.got_subcommand(eval)) {
      arbitrage::cmd_eval(load_effective_config(eval_opts), dataset_a, dataset_b);
    } else if (app.got_subcommand(report)) {
      arbitrage::cmd_report(load_effective_config(report_opts), dataset_path);
    } else if (app.got_subcommand(simulate)) {
      arbitrage::cmd_simulate(load_effective_config(simulate_opts));
    }
    return arbitrage::kExitOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? arbitrage::kExitOk : arbitrage::kExitConfig;
  } catch (const arbitrage::DataFailureError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return arbitrage::kExitDataFailure;
  } catch (const arbitrage::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return arbitrage::kExitNumeric;
  } catch (const arbitrage::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return arbitrage::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}

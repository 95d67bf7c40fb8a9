#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scaffold/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Task-reformulation training pipeline over hard problem sets"};
  app.require_subcommand(1);

  scaffold::GlobalOptions global;
  app.add_option("--config", global.config_path, "Settings file (key = value lines)")
      ->check(CLI::ExistingFile);
  app.add_option("--run-dir", global.run_dir, "Run directory for all artifacts")
      ->capture_default_str();

  std::function<int()> run;

  std::string ingest_input;
  CLI::App* ingest = app.add_subcommand("ingest", "Load a problem JSONL file into the run");
  ingest->add_option("input", ingest_input, "Problems JSONL file")->required();
  ingest->callback([&] { run = [&] { return scaffold::cmd_ingest(global, ingest_input); }; });

  std::string responses_path;
  CLI::App* reformulate =
      app.add_subcommand("reformulate", "Build reformulated variants at every level");
  reformulate->add_option("--from-responses", responses_path,
                          "Parse LLM reformulation responses instead of building directly");
  reformulate->callback(
      [&] { run = [&] { return scaffold::cmd_reformulate(global, responses_path); }; });

  std::string filter_mode;
  CLI::App* filter = app.add_subcommand("filter", "Drop problems that fail a judge filter");
  filter->add_option("--mode", filter_mode, "binary or silver")->required();
  filter->callback([&] { run = [&] { return scaffold::cmd_filter(global, filter_mode); }; });

  int hardset_n = 0;
  CLI::App* hardset =
      app.add_subcommand("hardset", "Flag problems with zero correct rollouts as hard");
  hardset->add_option("--n", hardset_n, "Rollouts per problem (default: configured hardset_n)");
  hardset->callback([&] { run = [&] { return scaffold::cmd_hardset(global, hardset_n); }; });

  std::string train_mode = "adaptive";
  std::int64_t train_steps = 100;
  std::uint64_t train_seed = 0;
  bool train_resume = false;
  CLI::App* train = app.add_subcommand("train", "Train the simulated learner on the hard set");
  train->add_option("--mode", train_mode, "adaptive or static")->capture_default_str();
  train->add_option("--steps", train_steps, "Total step target")->capture_default_str();
  CLI::Option* seed_opt = train->add_option("--seed", train_seed, "Master seed");
  train->add_flag("--resume", train_resume, "Continue from the latest checkpoint");
  train->callback([&] {
    run = [&, seed_opt] {
      return scaffold::cmd_train(global, train_mode, train_steps, train_seed,
                                 seed_opt->count() > 0, train_resume);
    };
  });

  std::string ks_spec = "1,2,4,8,16,32,64";
  CLI::App* eval = app.add_subcommand("eval", "Report pass@k and per-level accuracy");
  eval->add_option("--pass-at-k", ks_spec, "Comma-separated k values")->capture_default_str();
  eval->callback([&] { run = [&] { return scaffold::cmd_eval(global, ks_spec); }; });

  CLI::App* report = app.add_subcommand("report", "Render charts from the metrics log");
  report->callback([&] { run = [&] { return scaffold::cmd_report(global); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    return run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

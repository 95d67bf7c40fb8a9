#include "scaffold/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "scaffold/answer.hpp"
#include "scaffold/config.hpp"
#include "scaffold/curriculum.hpp"
#include "scaffold/dataset.hpp"
#include "scaffold/eval.hpp"
#include "scaffold/filters.hpp"
#include "scaffold/grpo.hpp"
#include "scaffold/provider.hpp"
#include "scaffold/reformulate.hpp"
#include "scaffold/report.hpp"
#include "scaffold/rng.hpp"
#include "scaffold/rundir.hpp"
#include "scaffold/train.hpp"

namespace scaffold {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Seed salts for command-level RNG streams, distinct from the trainer's.
constexpr std::uint64_t kMcq4Salt = 10;
constexpr std::uint64_t kMcq10Salt = 11;
constexpr std::uint64_t kClozeSalt = 12;
constexpr std::uint64_t kEvalPassSalt = 20;
constexpr std::uint64_t kEvalLevelSalt = 21;

Settings effective_settings(const GlobalOptions& global) {
  return global.config_path.empty() ? Settings{} : load_settings(global.config_path);
}

Dataset load_run_dataset(const RunDir& rd, const Settings& settings, bool want_variants,
                         bool want_hard) {
  const fs::path problems = rd.resolve(settings.problems_file);
  if (!fs::exists(problems))
    throw std::runtime_error("no dataset at " + problems.string() +
                             "; run the ingest command first");
  Dataset dataset = load_dataset(problems);
  if (want_variants) {
    const fs::path variants = rd.resolve(settings.variants_file);
    if (fs::exists(variants)) attach_stored_variants(dataset, load_variants(variants));
  }
  if (want_hard) {
    const fs::path hard = rd.resolve(settings.hard_set_file);
    if (fs::exists(hard)) load_hard_set(dataset, hard);
  }
  return dataset;
}

std::vector<Variant> collect_variants(const Dataset& dataset) {
  std::vector<Variant> out;
  for (const auto& [id, slots] : dataset.variants)
    for (const auto& slot : slots)
      if (slot) out.push_back(*slot);
  return out;
}

SimPolicyConfig sim_config(const Settings& settings) {
  SimPolicyConfig config;
  config.transfer = settings.sim_transfer;
  config.learning_rate = settings.sim_learning_rate;
  config.cloze_pool_size = settings.cloze_pool_size;
  config.open_ended_pool_size = settings.open_ended_pool_size;
  config.rng_seed = settings.seed;
  return config;
}

std::vector<const Problem*> eval_scope(const Dataset& dataset) {
  std::vector<const Problem*> hard = dataset.hard_problems();
  if (!hard.empty()) return hard;
  std::vector<const Problem*> all;
  for (const Problem& problem : dataset.problems) all.push_back(&problem);
  return all;
}

int count_digits(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c >= '0' && c <= '9') ++n;
  return n;
}

}  // namespace

int cmd_ingest(const GlobalOptions& global, const std::string& input_path) {
  Settings settings = effective_settings(global);
  RunDir rd{fs::path(global.run_dir)};
  rd.ensure_layout();
  Dataset dataset = load_dataset(input_path);
  save_dataset(dataset, rd.resolve(settings.problems_file));
  std::cout << "ingested " << dataset.problems.size() << " problems -> "
            << rd.resolve(settings.problems_file).string() << "\n";
  return 0;
}

int cmd_reformulate(const GlobalOptions& global, const std::string& responses_path) {
  Settings settings = effective_settings(global);
  RunDir rd{fs::path(global.run_dir)};
  rd.ensure_layout();
  Dataset dataset = load_run_dataset(rd, settings, /*want_variants=*/true, /*want_hard=*/false);

  if (!responses_path.empty()) {
    std::ifstream in(responses_path);
    if (!in) throw std::runtime_error("cannot read responses file: " + responses_path);
    std::ofstream rejected(rd.data_dir() / "rejected_variants.jsonl");
    std::string line;
    int attached = 0, dropped = 0, line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw std::runtime_error(responses_path + ":" + std::to_string(line_no) + ": " + e.what());
      }
      const std::string id = j.at("problem_id").get<std::string>();
      const DifficultyLevel level = level_from_value(j.at("level").get<int>());
      const Problem* problem = dataset.find(id);
      if (!problem)
        throw std::runtime_error(responses_path + ":" + std::to_string(line_no) +
                                 ": unknown problem id \"" + id + "\"");
      Variant variant =
          parse_reformulation_response(j.at("response").get<std::string>(), level, *problem);
      if (variant.validation.valid) {
        attach_variant(dataset, std::move(variant));
        ++attached;
      } else {
        rejected << json{{"problem_id", id},
                         {"level", level_value(level)},
                         {"reason", variant.validation.reason}}
                        .dump()
                 << "\n";
        ++dropped;
      }
    }
    std::vector<Variant> all = collect_variants(dataset);
    save_variants(all, rd.resolve(settings.variants_file));
    std::cout << "attached " << attached << " variants from responses, rejected " << dropped
              << " (see data/rejected_variants.jsonl)\n";
    return 0;
  }

  std::ofstream prompts_needed(rd.data_dir() / "prompts_needed.jsonl");
  std::ofstream mask_review(rd.data_dir() / "mask_review.jsonl");
  std::array<int, 4> built{};
  int prompts = 0, review = 0;
  for (std::size_t i = 0; i < dataset.problems.size(); ++i) {
    const Problem& problem = dataset.problems[i];
    auto need_prompt = [&](DifficultyLevel level) {
      prompts_needed << json{{"problem_id", problem.id},
                             {"level", level_value(level)},
                             {"prompt", render_reformulation_prompt(problem, level)}}
                            .dump()
                     << "\n";
      ++prompts;
    };

    DistractorPolicy policy4, policy10;
    policy4.rng_seed = derive_seed(settings.seed, kMcq4Salt, i);
    policy10.rng_seed = derive_seed(settings.seed, kMcq10Salt, i);
    try {
      attach_variant(dataset, build_mcq(problem, 4, policy4));
      ++built[0];
    } catch (const std::exception&) {
      need_prompt(DifficultyLevel::Mcq4);
    }
    try {
      attach_variant(dataset, build_mcq(problem, 10, policy10));
      ++built[1];
    } catch (const std::exception&) {
      need_prompt(DifficultyLevel::Mcq10);
    }
    if (count_digits(problem.gold_answer) >= 2) {
      attach_variant(dataset,
                     build_cloze(problem, derive_seed(settings.seed, kClozeSalt, i)));
      ++built[2];
    } else {
      need_prompt(DifficultyLevel::Cloze);
    }
    attach_variant(dataset, make_open_ended_variant(problem));
    ++built[3];

    if (needs_mask_review(problem.gold_answer)) {
      mask_review << json{{"problem_id", problem.id}, {"gold_answer", problem.gold_answer}}.dump()
                  << "\n";
      ++review;
    }
  }

  std::vector<Variant> all = collect_variants(dataset);
  save_variants(all, rd.resolve(settings.variants_file));
  std::cout << "built variants: mcq4 " << built[0] << ", mcq10 " << built[1] << ", cloze "
            << built[2] << ", open-ended " << built[3] << "\n";
  std::cout << prompts << " levels need the LLM path (data/prompts_needed.jsonl), " << review
            << " golds flagged for mask review (data/mask_review.jsonl)\n";
  return 0;
}

int cmd_hardset(const GlobalOptions& global, int n) {
  Settings settings = effective_settings(global);
  if (n <= 0) n = settings.hardset_n;
  RunDir rd{fs::path(global.run_dir)};
  rd.ensure_layout();
  Dataset dataset = load_run_dataset(rd, settings, /*want_variants=*/true, /*want_hard=*/false);
  auto provider = make_provider_from_settings(settings, /*judge_role=*/false,
                                              global.run_dir, &dataset,
                                              rd.requests_log().string());

  std::ofstream counts(rd.data_dir() / "hardset_counts.csv");
  counts << "problem_id,n,c,hard\n" << std::flush;
  int hard = 0;
  build_hard_set(dataset, *provider, n, settings.seed, [&](const HardSetProgress& p) {
    counts << p.problem_id << "," << p.n << "," << p.c << "," << (p.hard ? 1 : 0) << "\n"
           << std::flush;
    if (p.hard) ++hard;
  });
  save_hard_set(dataset, rd.resolve(settings.hard_set_file));
  std::cout << "flagged " << hard << " of " << dataset.problems.size() << " problems hard -> "
            << rd.resolve(settings.hard_set_file).string() << "\n";
  return 0;
}

int cmd_filter(const GlobalOptions& global, const std::string& mode) {
  if (mode != "binary" && mode != "silver")
    throw std::runtime_error("filter mode must be binary or silver");
  Settings settings = effective_settings(global);
  RunDir rd{fs::path(global.run_dir)};
  rd.ensure_layout();
  Dataset dataset = load_run_dataset(rd, settings, /*want_variants=*/true, /*want_hard=*/true);
  auto judge = make_provider_from_settings(settings, /*judge_role=*/true, global.run_dir,
                                           &dataset, rd.requests_log().string());

  std::vector<FilterVerdict> verdicts =
      mode == "silver" ? silver_answer_filter(dataset, *judge, settings.silver_runs, settings.seed)
                       : binary_filter(dataset, *judge, settings.seed);

  std::ofstream log(rd.data_dir() / ("filter_" + mode + ".jsonl"));
  for (const FilterVerdict& v : verdicts)
    log << json{{"problem_id", v.problem_id},
                {"filter", v.filter},
                {"kept", v.kept},
                {"judge_answers", v.judge_answers},
                {"note", v.note}}
               .dump()
        << "\n";

  const fs::path problems = rd.resolve(settings.problems_file);
  fs::copy_file(problems, problems.string() + ".bak", fs::copy_options::overwrite_existing);
  const std::size_t removed = apply_filter(dataset, verdicts);
  save_dataset(dataset, problems);
  std::vector<Variant> all = collect_variants(dataset);
  save_variants(all, rd.resolve(settings.variants_file));
  if (fs::exists(rd.resolve(settings.hard_set_file)))
    save_hard_set(dataset, rd.resolve(settings.hard_set_file));
  std::cout << mode << " filter dropped " << removed << " problems, kept "
            << dataset.problems.size() << " (verdicts in data/filter_" << mode << ".jsonl)\n";
  return 0;
}

namespace {

void write_checkpoint(const RunDir& rd, const Trainer& trainer) {
  const TrainerMeta meta = trainer.meta();
  rd.publish_checkpoint(meta.next_step, [&](const fs::path& dir) {
    save_curriculum((dir / "curriculum.json").string(), trainer.curriculum(), meta);
    save_policy((dir / "policy.json").string(), trainer.policy(), meta.master_seed,
                meta.next_step);
  });
}

}  // namespace

int cmd_train(const GlobalOptions& global, const std::string& mode, std::int64_t steps,
              std::uint64_t seed, bool seed_given, bool resume) {
  Settings settings = effective_settings(global);
  if (seed_given) settings.seed = seed;
  settings.static_mixture = mode == "static";
  RunDir rd{fs::path(global.run_dir)};
  rd.ensure_layout();
  Dataset dataset = load_run_dataset(rd, settings, /*want_variants=*/true, /*want_hard=*/true);
  if (dataset.hard_problems().empty())
    throw std::runtime_error("no hard-flagged problems; run the hardset command first");

  CurriculumState state;
  SimPolicy policy;
  TrainOptions options;
  std::int64_t start_step = 0, cumulative = 0;

  if (resume) {
    std::vector<std::int64_t> checkpoints = rd.checkpoint_steps();
    if (checkpoints.empty())
      throw std::runtime_error("nothing to resume: no checkpoints under " +
                               rd.checkpoints_dir().string());
    const std::int64_t latest = checkpoints.back();
    TrainerMeta meta;
    state = load_curriculum((rd.checkpoint_dir(latest) / "curriculum.json").string(), &meta);
    std::uint64_t policy_seed = 0;
    std::int64_t policy_step = 0;
    policy = load_policy((rd.checkpoint_dir(latest) / "policy.json").string(), &policy_seed,
                         &policy_step);
    if (policy_seed != meta.master_seed || policy_step != meta.next_step)
      throw std::runtime_error("checkpoint step-" + std::to_string(latest) +
                               " is internally inconsistent (curriculum vs policy RNG state)");
    if (meta.mode != mode)
      throw std::runtime_error("checkpoint was trained with --mode " + meta.mode +
                               "; resuming with --mode " + mode + " would not replay");
    options.mode = meta.mode;
    options.seed = meta.master_seed;
    options.batch_size = meta.batch_size;
    options.rollout_n = meta.rollout_n;
    start_step = meta.next_step;
    cumulative = meta.cumulative_rollouts;
  } else {
    if (fs::exists(rd.metrics_csv()))
      throw std::runtime_error(rd.metrics_csv().string() +
                               " already exists; use --resume or a fresh --run-dir");
    CurriculumConfig config;
    config.tau = settings.tau;
    config.m = settings.curriculum_m;
    config.graduation = settings.graduation == "downweight" ? GraduationPolicy::Downweight
                                                            : GraduationPolicy::Retire;
    config.downweight_factor = settings.downweight_factor;
    config.static_mixture = settings.static_mixture;
    state = init_curriculum(dataset, config);
    policy = build_sim_policy(dataset, sim_config(settings));
    options.mode = mode;
    options.seed = settings.seed;
    options.batch_size = settings.train_batch_size;
    options.rollout_n = settings.rollout_n;
    rd.write_config_snapshot(render_settings(settings));
  }

  Trainer trainer(dataset, std::move(state), std::move(policy), options, RewardConfig{},
                  start_step, cumulative);
  if (trainer.next_step() >= steps) {
    std::cout << "checkpoint already at step " << trainer.next_step() << ", target " << steps
              << "; nothing to do\n";
    return 0;
  }

  StepMetrics last;
  bool ran = false;
  while (trainer.next_step() < steps && !trainer.done()) {
    StepMetrics metrics = trainer.step();
    if (metrics.complete) break;
    ran = true;
    last = metrics;
    rd.append_metrics(Trainer::metrics_header(), Trainer::metrics_row(metrics));
    if (settings.checkpoint_every > 0 && trainer.next_step() % settings.checkpoint_every == 0)
      write_checkpoint(rd, trainer);
  }
  write_checkpoint(rd, trainer);

  std::cout << "trained to step " << trainer.next_step();
  if (ran)
    std::cout << ", pass@1 " << format_metric(last.pass_at_1) << ", open-ended gold prob "
              << format_metric(last.oeq_gold_prob);
  if (trainer.done()) std::cout << " (curriculum complete)";
  std::cout << "\n";
  return 0;
}

int cmd_eval(const GlobalOptions& global, const std::string& ks_spec) {
  Settings settings = effective_settings(global);
  RunDir rd{fs::path(global.run_dir)};
  rd.ensure_layout();
  Dataset dataset = load_run_dataset(rd, settings, /*want_variants=*/true, /*want_hard=*/true);

  std::vector<int> ks;
  std::size_t start = 0;
  while (start <= ks_spec.size()) {
    std::size_t comma = ks_spec.find(',', start);
    const std::string token = ks_spec.substr(start, comma - start);
    if (!token.empty()) ks.push_back(std::stoi(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (ks.empty()) throw std::runtime_error("--pass-at-k needs a comma-separated list of k");
  std::set<int> unique(ks.begin(), ks.end());
  ks.assign(unique.begin(), unique.end());
  const int n = ks.back();

  SimPolicy policy;
  std::vector<std::int64_t> checkpoints = rd.checkpoint_steps();
  if (!checkpoints.empty()) {
    policy = load_policy(
        (rd.checkpoint_dir(checkpoints.back()) / "policy.json").string());
    std::cout << "evaluating checkpoint step-" << checkpoints.back() << "\n";
  } else {
    policy = build_sim_policy(dataset, sim_config(settings));
    std::cout << "no checkpoints; evaluating the untrained policy\n";
  }

  std::vector<const Problem*> scope = eval_scope(dataset);
  if (scope.empty()) throw std::runtime_error("dataset is empty; nothing to evaluate");

  std::vector<std::pair<int, int>> samples;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    RolloutGroup group =
        sample_rollouts(policy, scope[i]->id, DifficultyLevel::OpenEnded, n,
                        derive_seed(settings.seed, kEvalPassSalt, i));
    int c = 0;
    for (Eigen::Index j = 0; j < group.rewards.size(); ++j)
      if (group.rewards[j] >= RewardConfig{}.correct_weight) ++c;
    samples.emplace_back(n, c);
  }
  std::map<int, double> curve = pass_at_k_curve(samples, ks);
  write_pass_at_k_csv((rd.reports_dir() / "pass_at_k.csv").string(), curve);

  std::vector<RolloutGroup> groups;
  for (DifficultyLevel level : all_levels()) {
    for (std::size_t i = 0; i < scope.size(); ++i) {
      if (!policy.has_pool(scope[i]->id, level)) continue;
      groups.push_back(sample_rollouts(
          policy, scope[i]->id, level, settings.rollout_n,
          derive_seed(settings.seed, kEvalLevelSalt, i, level_value(level))));
    }
  }
  std::map<DifficultyLevel, double> accuracy = format_accuracy_report(groups);
  write_level_accuracy_csv((rd.reports_dir() / "level_accuracy.csv").string(), accuracy);

  std::cout << "pass@" << ks.front() << " " << format_metric(curve.begin()->second) << ", pass@"
            << ks.back() << " " << format_metric(curve.rbegin()->second) << " over "
            << scope.size() << " problems -> reports/pass_at_k.csv\n";
  std::cout << "per-level accuracy -> reports/level_accuracy.csv\n";
  return 0;
}

int cmd_report(const GlobalOptions& global) {
  RunDir rd{fs::path(global.run_dir)};
  if (!fs::exists(rd.metrics_csv()))
    throw std::runtime_error("no metrics at " + rd.metrics_csv().string() +
                             "; run the train command first");
  fs::create_directories(rd.reports_dir());
  CsvTable metrics = read_csv(rd.metrics_csv().string());

  const std::array<std::string, 4> level_labels{"MCQ-4", "MCQ-10", "Cloze", "Open-ended"};
  const std::array<std::string, 4> level_colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};

  auto series_of = [&metrics](const std::string& column, const std::string& label,
                              const std::string& color) {
    Series s;
    s.label = label;
    s.color = color;
    for (const auto& row : metrics.rows) {
      const std::string& cell = row.at(column);
      if (cell.empty()) continue;
      s.xs.push_back(std::stod(row.at("step")));
      s.ys.push_back(std::stod(cell));
    }
    return s;
  };

  std::vector<Series> shares;
  for (int f = 0; f < 4; ++f)
    shares.push_back(series_of("progress_l" + std::to_string(f + 1), level_labels[f],
                               level_colors[f]));
  write_line_chart_svg((rd.reports_dir() / "level_shares.svg").string(),
                       "Curriculum level shares over training", "step", "share of problems",
                       shares);

  std::vector<Series> accuracy;
  for (int f = 0; f < 4; ++f)
    accuracy.push_back(
        series_of("acc_l" + std::to_string(f + 1), level_labels[f], level_colors[f]));
  accuracy.push_back(series_of("pass_at_1", "pass@1", "#9467bd"));
  accuracy.push_back(series_of("oeq_gold_prob", "OEQ gold prob", "#8c564b"));
  write_line_chart_svg((rd.reports_dir() / "accuracy.svg").string(),
                       "Training accuracy by format", "step", "accuracy", accuracy);

  int charts = 2;
  const fs::path pass_csv = rd.reports_dir() / "pass_at_k.csv";
  if (fs::exists(pass_csv)) {
    CsvTable curve = read_csv(pass_csv.string());
    Series s;
    s.label = "pass@k";
    s.color = "#1f77b4";
    for (const auto& row : curve.rows) {
      s.xs.push_back(std::stod(row.at("k")));
      s.ys.push_back(std::stod(row.at("pass_at_k")));
    }
    write_line_chart_svg((rd.reports_dir() / "pass_at_k.svg").string(), "pass@k", "k", "pass@k",
                         {s});
    ++charts;
  }
  std::cout << "wrote " << charts << " charts under " << rd.reports_dir().string() << "\n";
  return 0;
}

}  // namespace scaffold

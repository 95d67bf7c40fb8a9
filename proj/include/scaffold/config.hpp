#pragma once

#include <cstdint>
#include <string>

namespace scaffold {

// Effective run settings. Optimizer hyperparameters that only apply to a
// real LLM backend (lr, kl_coef, clip ratios, length caps) are parsed and
// carried so remote runs inherit sensible defaults, but the simulated
// learner does not read them; its own knobs are the sim_* keys.
struct Settings {
  // real-backend hyperparameters
  double lr = 1e-6;
  double kl_coef = 0.01;
  double clip_ratio_low = 0.2;
  double clip_ratio_high = 0.28;
  int max_prompt_length = 1024;
  int max_response_length = 8192;
  int num_train_samples = 958;
  double rollout_temperature = 1.0;
  double inference_temperature = 0.7;

  // shared loop shape
  int rollout_n = 8;
  int train_batch_size = 8;
  std::uint64_t seed = 0;
  int checkpoint_every = 10;

  // curriculum
  double tau = 0.5;
  int curriculum_m = 8;
  std::string graduation = "retire";  // retire | downweight
  double downweight_factor = 0.25;
  bool static_mixture = false;

  // simulated learner
  double sim_learning_rate = 1.0;
  bool sim_transfer = true;
  int cloze_pool_size = 10;
  int open_ended_pool_size = 50;

  // providers
  std::string provider = "simulated";  // simulated | remote | scripted
  std::string provider_fixture;
  std::string judge = "scripted";  // remote | scripted
  std::string judge_fixture;
  std::string endpoint_url;
  std::string model;
  std::string judge_model;
  int hardset_n = 64;
  int silver_runs = 3;

  // dataset files, resolved against the run directory unless absolute
  std::string problems_file = "data/problems.jsonl";
  std::string variants_file = "data/variants.jsonl";
  std::string hard_set_file = "data/hard_set.json";
};

// Flat "key = value" format; '#' starts a comment, blank lines ignored.
// Unknown keys are errors so typos cannot silently fall back to defaults.
Settings parse_settings_text(const std::string& text, const std::string& origin = "<config>");
Settings load_settings(const std::string& path);

// Deterministic flat rendering of every key, used for config.snapshot.
std::string render_settings(const Settings& settings);

}  // namespace scaffold

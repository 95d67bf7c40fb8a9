#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scaffold/config.hpp"
#include "scaffold/curriculum.hpp"
#include "scaffold/dataset.hpp"
#include "scaffold/grpo.hpp"

namespace scaffold {

struct TrainOptions {
  std::string mode = "adaptive";  // adaptive | static
  std::uint64_t seed = 0;
  int batch_size = 8;
  int rollout_n = 8;
};

struct StepMetrics {
  std::int64_t step = 0;
  std::array<double, 4> batch_share{};     // batch entries per level
  std::array<double, 4> active_share{};    // non-graduated records per level
  std::array<double, 4> progress_share{};  // all records, graduated at level 4
  std::array<std::optional<double>, 4> level_accuracy;  // empty when unsampled
  double pass_at_1 = 0.0;        // mean correctness over this step's rollouts
  double oeq_gold_prob = 0.0;    // transfer probe mean over all records
  std::int64_t cumulative_rollouts = 0;
  std::int64_t unboxed_correct = 0;
  bool complete = false;  // nothing left to sample; no step was taken
};

// One seeded training loop over the simulated learner. Every random draw is
// keyed by (seed, step, slot) counters, so resuming from a checkpoint at
// step s replays steps s, s+1, ... bit-for-bit.
class Trainer {
 public:
  Trainer(const Dataset& dataset, CurriculumState state, SimPolicy policy, TrainOptions options,
          RewardConfig reward = {}, std::int64_t next_step = 0,
          std::int64_t cumulative_rollouts = 0);

  StepMetrics step();

  bool done() const;
  std::int64_t next_step() const { return next_step_; }
  const CurriculumState& curriculum() const { return state_; }
  const SimPolicy& policy() const { return policy_; }
  const TrainOptions& options() const { return options_; }
  TrainerMeta meta() const;

  static std::string metrics_header();
  static std::string metrics_row(const StepMetrics& metrics);

 private:
  const Dataset& dataset_;
  CurriculumState state_;
  SimPolicy policy_;
  TrainOptions options_;
  RewardConfig reward_;
  std::int64_t next_step_ = 0;
  std::int64_t cumulative_rollouts_ = 0;
};

// Runs up to max_steps, stopping early when the curriculum completes or the
// mean open-ended gold probability reaches oeq_target (ignored when <= 0).
std::vector<StepMetrics> run_steps(Trainer& trainer, std::int64_t max_steps,
                                   double oeq_target = -1.0);

}  // namespace scaffold

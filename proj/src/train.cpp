#include "scaffold/train.hpp"

#include <sstream>
#include <stdexcept>

#include "scaffold/eval.hpp"
#include "scaffold/rng.hpp"

namespace scaffold {

namespace {

// Salts for derive_seed streams; distinct per draw site.
constexpr std::uint64_t kBatchSalt = 1;
constexpr std::uint64_t kRolloutSalt = 2;

}  // namespace

Trainer::Trainer(const Dataset& dataset, CurriculumState state, SimPolicy policy,
                 TrainOptions options, RewardConfig reward, std::int64_t next_step,
                 std::int64_t cumulative_rollouts)
    : dataset_(dataset),
      state_(std::move(state)),
      policy_(std::move(policy)),
      options_(std::move(options)),
      reward_(reward),
      next_step_(next_step),
      cumulative_rollouts_(cumulative_rollouts) {
  if (options_.mode != "adaptive" && options_.mode != "static")
    throw std::invalid_argument("Trainer: mode must be adaptive or static");
  if (options_.mode == "adaptive" && options_.rollout_n != state_.config.m)
    throw std::invalid_argument(
        "Trainer: rollout_n must equal the curriculum group size m; promotion accuracy is "
        "estimated from the same rollouts");
  state_.config.static_mixture = options_.mode == "static";
}

bool Trainer::done() const {
  return options_.mode == "adaptive" && state_.config.graduation == GraduationPolicy::Retire &&
         curriculum_complete(state_);
}

StepMetrics Trainer::step() {
  StepMetrics metrics;
  metrics.step = next_step_;

  std::vector<BatchEntry> batch = compose_batch(
      state_, dataset_, options_.batch_size, derive_seed(options_.seed, kBatchSalt, next_step_));
  if (batch.empty()) {
    metrics.complete = true;
    metrics.active_share = level_histogram(state_);
    metrics.progress_share = level_histogram_with_graduated(state_);
    metrics.cumulative_rollouts = cumulative_rollouts_;
    return metrics;
  }

  std::array<double, 4> level_correct{};
  std::array<double, 4> level_total{};
  std::vector<RolloutGroup> groups;
  groups.reserve(batch.size());
  for (std::size_t slot = 0; slot < batch.size(); ++slot) {
    const BatchEntry& entry = batch[slot];
    metrics.batch_share[level_index(entry.level)] += 1.0;
    RolloutGroup group =
        sample_rollouts(policy_, entry.problem_id, entry.level, options_.rollout_n,
                        derive_seed(options_.seed, kRolloutSalt, next_step_, slot), reward_);

    std::vector<bool> outcomes;
    outcomes.reserve(group.rewards.size());
    for (Eigen::Index j = 0; j < group.rewards.size(); ++j) {
      const bool correct = group.rewards[j] >= reward_.correct_weight;
      outcomes.push_back(correct);
      level_total[level_index(entry.level)] += 1.0;
      if (correct) level_correct[level_index(entry.level)] += 1.0;
    }
    const Problem* problem = dataset_.find(entry.problem_id);
    for (const std::string& completion : group.completions)
      if (score_completion(completion, problem->gold_answer, reward_).unboxed_correct)
        ++metrics.unboxed_correct;

    if (options_.mode == "adaptive") {
      const CurriculumRecord* record = state_.find(entry.problem_id);
      if (record && !record->graduated)
        record_outcomes(state_, entry.problem_id, outcomes, next_step_);
    }
    groups.push_back(std::move(group));
  }

  // Updates are applied serially in batch order after all sampling, so every
  // group is drawn from the step-start policy.
  for (const RolloutGroup& group : groups) policy_gradient_update(policy_, group);

  double total = 0.0, correct = 0.0;
  for (int f = 0; f < 4; ++f) {
    metrics.batch_share[f] /= static_cast<double>(batch.size());
    total += level_total[f];
    correct += level_correct[f];
    if (level_total[f] > 0.0) metrics.level_accuracy[f] = level_correct[f] / level_total[f];
  }
  metrics.pass_at_1 = total > 0.0 ? correct / total : 0.0;
  metrics.active_share = level_histogram(state_);
  metrics.progress_share = level_histogram_with_graduated(state_);

  double probe_sum = 0.0;
  for (const CurriculumRecord& record : state_.records)
    probe_sum += gold_probability(policy_, record.problem_id, DifficultyLevel::OpenEnded);
  metrics.oeq_gold_prob =
      state_.records.empty() ? 0.0 : probe_sum / static_cast<double>(state_.records.size());

  cumulative_rollouts_ += static_cast<std::int64_t>(batch.size()) * options_.rollout_n;
  metrics.cumulative_rollouts = cumulative_rollouts_;
  ++next_step_;
  return metrics;
}

TrainerMeta Trainer::meta() const {
  TrainerMeta meta;
  meta.master_seed = options_.seed;
  meta.next_step = next_step_;
  meta.mode = options_.mode;
  meta.batch_size = options_.batch_size;
  meta.rollout_n = options_.rollout_n;
  meta.cumulative_rollouts = cumulative_rollouts_;
  return meta;
}

std::string Trainer::metrics_header() {
  return "step,batch_l1,batch_l2,batch_l3,batch_l4,"
         "active_l1,active_l2,active_l3,active_l4,"
         "progress_l1,progress_l2,progress_l3,progress_l4,"
         "acc_l1,acc_l2,acc_l3,acc_l4,"
         "pass_at_1,oeq_gold_prob,cumulative_rollouts,unboxed_correct";
}

std::string Trainer::metrics_row(const StepMetrics& m) {
  std::ostringstream row;
  row << m.step;
  for (double v : m.batch_share) row << "," << format_metric(v);
  for (double v : m.active_share) row << "," << format_metric(v);
  for (double v : m.progress_share) row << "," << format_metric(v);
  for (const std::optional<double>& v : m.level_accuracy) {
    row << ",";
    if (v) row << format_metric(*v);
  }
  row << "," << format_metric(m.pass_at_1);
  row << "," << format_metric(m.oeq_gold_prob);
  row << "," << m.cumulative_rollouts;
  row << "," << m.unboxed_correct;
  return row.str();
}

std::vector<StepMetrics> run_steps(Trainer& trainer, std::int64_t max_steps, double oeq_target) {
  std::vector<StepMetrics> history;
  for (std::int64_t i = 0; i < max_steps; ++i) {
    if (trainer.done()) break;
    StepMetrics metrics = trainer.step();
    if (metrics.complete) break;
    history.push_back(metrics);
    if (oeq_target > 0.0 && metrics.oeq_gold_prob >= oeq_target) break;
  }
  return history;
}

}  // namespace scaffold

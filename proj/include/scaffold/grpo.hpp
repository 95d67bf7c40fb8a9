#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scaffold/dataset.hpp"

namespace scaffold {

struct RewardConfig {
  double correct_weight = 1.0;
  double format_weight = 0.2;
  double normalization_epsilon = 1e-8;
};

// Reward components for one completion. Correctness requires a boxed answer;
// a correct but unboxed answer is surfaced via unboxed_correct so the policy
// decision stays auditable in metrics.
struct Score {
  double correct = 0.0;
  double format = 0.0;
  bool boxed = false;
  bool unboxed_correct = false;
  double total() const { return correct + format; }
};

Score score_completion(std::string_view completion, std::string_view gold,
                       const RewardConfig& config = {});

// (r - mean) / (population_std + epsilon). A constant group returns exact
// zeros: the all-same-reward case must produce a bitwise no-op update, and
// the floating mean of identical values is not exact in general.
Eigen::ArrayXd normalize_group(const Eigen::ArrayXd& rewards, double epsilon);

struct RolloutGroup {
  std::string problem_id;
  DifficultyLevel level = DifficultyLevel::Mcq4;
  std::vector<std::string> completions;
  std::vector<int> candidate_indices;  // per-completion pool index, for the exact gradient
  Eigen::ArrayXd rewards;
  Eigen::ArrayXd advantages;
};

// Candidate answers the simulated learner can emit for one (problem, level).
// Gold is stored first so equal-probability levels draw identically under a
// shared uniform stream.
struct Pool {
  std::vector<std::string> candidates;
  int gold_index = 0;
};

// Categorical learner over candidate pools. Gold's logit is g + b_f where g
// is the per-problem knowledge logit and b_f the per-level format bias; all
// non-gold logits are 0. With transfer enabled g is shared across levels,
// which is what lets easy-format learning raise open-ended accuracy; the
// ablation keeps an independent g per level.
struct SimPolicy {
  bool transfer = true;
  double learning_rate = 1.0;
  std::map<std::string, double> knowledge;
  std::map<std::string, std::array<double, 4>> knowledge_by_level;
  std::array<double, 4> format_bias{0.0, 0.0, 0.0, 0.0};
  std::map<std::string, std::array<std::optional<Pool>, 4>> pools;

  double knowledge_logit(const std::string& problem_id, DifficultyLevel level) const;
  void bump(const std::string& problem_id, DifficultyLevel level, double delta);
  bool has_pool(const std::string& problem_id, DifficultyLevel level) const;
  const Pool& pool(const std::string& problem_id, DifficultyLevel level) const;
};

struct SimPolicyConfig {
  bool transfer = true;
  double learning_rate = 1.0;
  int cloze_pool_size = 10;
  int open_ended_pool_size = 50;
  std::uint64_t rng_seed = 0;
};

// Pools from the dataset's valid variants: MCQ options as-is, cloze masks
// expanded into digit fills, an open-ended pool of gold plus offsets. Level 4
// is always buildable; levels 1-3 require a valid variant.
SimPolicy build_sim_policy(const Dataset& dataset, const SimPolicyConfig& config);

Eigen::ArrayXd pool_logits(const SimPolicy& policy, const std::string& problem_id,
                           DifficultyLevel level);
Eigen::ArrayXd pool_probabilities(const SimPolicy& policy, const std::string& problem_id,
                                  DifficultyLevel level);
double gold_probability(const SimPolicy& policy, const std::string& problem_id,
                        DifficultyLevel level);

// m softmax draws rendered as "\boxed{<candidate>}", scored against the
// pool's gold candidate, with group-normalized advantages attached.
RolloutGroup sample_rollouts(const SimPolicy& policy, const std::string& problem_id,
                             DifficultyLevel level, int m, std::uint64_t rng_seed,
                             const RewardConfig& reward = {});

// The GRPO surrogate on a frozen group: -(1/m) sum_j adv_j log p(a_j).
// Advantages are treated as constants, so this is the function whose exact
// gradient the update applies; the finite-difference test perturbs it.
double group_objective(const SimPolicy& policy, const RolloutGroup& group);

// Loss gradient d objective / d theta. Both coordinates equal
// -(1/m) sum_j adv_j (1[a_j = gold] - p_gold) because gold's logit is the
// only parameterized one and equals g + b_f.
struct GroupGradient {
  double knowledge = 0.0;
  double format_bias = 0.0;
};

GroupGradient group_gradient(const SimPolicy& policy, const RolloutGroup& group);

// One REINFORCE step: theta -= learning_rate * gradient. A zero gradient
// (in particular, any constant-reward group) leaves the policy bitwise
// unchanged.
void policy_gradient_update(SimPolicy& policy, const RolloutGroup& group);

// Closed-form gold probability at every level for one problem.
std::array<double, 4> transfer_probe(const SimPolicy& policy, const std::string& problem_id);

void save_policy(const std::string& path, const SimPolicy& policy, std::uint64_t master_seed,
                 std::int64_t next_step);
SimPolicy load_policy(const std::string& path, std::uint64_t* master_seed = nullptr,
                      std::int64_t* next_step = nullptr);

}  // namespace scaffold

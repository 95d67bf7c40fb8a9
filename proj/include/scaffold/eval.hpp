#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scaffold/dataset.hpp"
#include "scaffold/grpo.hpp"

namespace scaffold {

struct PassAtKInput {
  int n = 0;  // samples drawn
  int c = 0;  // correct among them
  int k = 0;  // evaluation budget, 1 <= k <= n
};

// Unbiased estimator 1 - C(n-c, k)/C(n, k) in the overflow-safe product form
// 1 - prod_{i=n-c+1}^{n} (1 - k/i).
double pass_at_k(const PassAtKInput& input);

// The literal per-draw definition: did any of the first k outcomes succeed.
bool pass_at_k_indicator(const std::vector<bool>& outcomes, int k);

// Mean of pass_at_k over problems for each k. samples holds per-problem
// (n, c); every k must be <= the smallest n.
std::map<int, double> pass_at_k_curve(const std::vector<std::pair<int, int>>& samples,
                                      const std::vector<int>& ks);

// Per-level mean correctness over all rollouts in the groups. A rollout
// counts correct iff its reward includes the full correct_weight.
std::map<DifficultyLevel, double> format_accuracy_report(const std::vector<RolloutGroup>& groups,
                                                         const RewardConfig& reward = {});

// Deterministic short formatting shared by every CSV the artifact emits;
// byte-identical reruns depend on a single formatter.
std::string format_metric(double value);

void write_level_accuracy_csv(const std::string& path,
                              const std::map<DifficultyLevel, double>& accuracy);
void write_pass_at_k_csv(const std::string& path, const std::map<int, double>& curve);

}  // namespace scaffold

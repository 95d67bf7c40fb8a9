#include "scaffold/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace scaffold {

double pass_at_k(const PassAtKInput& input) {
  if (input.n < 1) throw std::invalid_argument("pass_at_k: n must be >= 1");
  if (input.c < 0 || input.c > input.n)
    throw std::invalid_argument("pass_at_k: c must be in [0, n]");
  if (input.k < 1 || input.k > input.n)
    throw std::invalid_argument("pass_at_k: k must be in [1, n]");
  if (input.c == 0) return 0.0;
  // When c > n - k the factor at i = k is exactly 0, giving pass@k = 1.
  double miss = 1.0;
  for (int i = input.n - input.c + 1; i <= input.n; ++i)
    miss *= 1.0 - static_cast<double>(input.k) / static_cast<double>(i);
  return 1.0 - miss;
}

bool pass_at_k_indicator(const std::vector<bool>& outcomes, int k) {
  if (k < 1 || k > static_cast<int>(outcomes.size()))
    throw std::invalid_argument("pass_at_k_indicator: k must be in [1, |outcomes|]");
  return std::any_of(outcomes.begin(), outcomes.begin() + k, [](bool b) { return b; });
}

std::map<int, double> pass_at_k_curve(const std::vector<std::pair<int, int>>& samples,
                                      const std::vector<int>& ks) {
  if (samples.empty()) throw std::invalid_argument("pass_at_k_curve: empty problem set");
  int min_n = samples.front().first;
  for (const auto& [n, c] : samples) min_n = std::min(min_n, n);
  std::map<int, double> curve;
  for (int k : ks) {
    if (k > min_n)
      throw std::invalid_argument("pass_at_k_curve: k = " + std::to_string(k) +
                                  " exceeds smallest sample count " + std::to_string(min_n));
    double sum = 0.0;
    for (const auto& [n, c] : samples) sum += pass_at_k(PassAtKInput{n, c, k});
    curve[k] = sum / static_cast<double>(samples.size());
  }
  return curve;
}

std::map<DifficultyLevel, double> format_accuracy_report(const std::vector<RolloutGroup>& groups,
                                                         const RewardConfig& reward) {
  std::map<DifficultyLevel, double> correct;
  std::map<DifficultyLevel, double> total;
  for (const RolloutGroup& group : groups) {
    for (Eigen::Index j = 0; j < group.rewards.size(); ++j) {
      total[group.level] += 1.0;
      if (group.rewards[j] >= reward.correct_weight) correct[group.level] += 1.0;
    }
  }
  std::map<DifficultyLevel, double> out;
  for (const auto& [level, count] : total) out[level] = correct[level] / count;
  return out;
}

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

void write_level_accuracy_csv(const std::string& path,
                              const std::map<DifficultyLevel, double>& accuracy) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "level,accuracy\n";
  for (const auto& [level, value] : accuracy)
    out << level_value(level) << "," << format_metric(value) << "\n";
}

void write_pass_at_k_csv(const std::string& path, const std::map<int, double>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "k,pass_at_k\n";
  for (const auto& [k, value] : curve) out << k << "," << format_metric(value) << "\n";
}

}  // namespace scaffold

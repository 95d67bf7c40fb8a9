#include "scaffold/grpo.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scaffold/answer.hpp"
#include "scaffold/rng.hpp"

namespace scaffold {

using nlohmann::json;

Score score_completion(std::string_view completion, std::string_view gold,
                       const RewardConfig& config) {
  Score score;
  std::optional<std::string> boxed = extract_boxed(completion);
  if (boxed) {
    score.boxed = true;
    score.format = config.format_weight;
    if (equivalent(*boxed, gold)) score.correct = config.correct_weight;
  } else if (equivalent(completion, gold)) {
    score.unboxed_correct = true;
  }
  return score;
}

Eigen::ArrayXd normalize_group(const Eigen::ArrayXd& rewards, double epsilon) {
  if (rewards.size() == 0) throw std::invalid_argument("normalize_group: empty reward list");
  if (rewards.maxCoeff() == rewards.minCoeff())
    return Eigen::ArrayXd::Zero(rewards.size());
  const double mean = rewards.mean();
  const double std_dev = std::sqrt((rewards - mean).square().mean());
  return (rewards - mean) / (std_dev + epsilon);
}

double SimPolicy::knowledge_logit(const std::string& problem_id, DifficultyLevel level) const {
  if (transfer) {
    auto it = knowledge.find(problem_id);
    return it == knowledge.end() ? 0.0 : it->second;
  }
  auto it = knowledge_by_level.find(problem_id);
  return it == knowledge_by_level.end() ? 0.0 : it->second[level_index(level)];
}

void SimPolicy::bump(const std::string& problem_id, DifficultyLevel level, double delta) {
  if (transfer) {
    knowledge[problem_id] += delta;
  } else {
    auto it = knowledge_by_level.find(problem_id);
    if (it == knowledge_by_level.end())
      it = knowledge_by_level.emplace(problem_id, std::array<double, 4>{0, 0, 0, 0}).first;
    it->second[level_index(level)] += delta;
  }
}

bool SimPolicy::has_pool(const std::string& problem_id, DifficultyLevel level) const {
  auto it = pools.find(problem_id);
  return it != pools.end() && it->second[level_index(level)].has_value();
}

const Pool& SimPolicy::pool(const std::string& problem_id, DifficultyLevel level) const {
  auto it = pools.find(problem_id);
  if (it == pools.end() || !it->second[level_index(level)])
    throw std::runtime_error("no candidate pool for problem \"" + problem_id + "\" at level " +
                             std::to_string(level_value(level)));
  return *it->second[level_index(level)];
}

namespace {

// Every completion of a cloze mask: revealed characters fixed, each '_'
// replaced by a digit. With one placeholder there are exactly 10 fills.
std::string apply_fill(std::string_view mask, std::string_view fill_digits) {
  std::string out(mask);
  std::size_t next = 0;
  for (char& c : out)
    if (c == '_') c = fill_digits[next++];
  return out;
}

Pool build_cloze_pool(const Problem& problem, const Variant& variant, int pool_size, Rng& rng) {
  const std::string& mask = variant.mask;
  std::size_t holes = 0;
  std::string gold_fill;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == '_') {
      ++holes;
      gold_fill += problem.gold_answer[i];
    }
  }

  Pool pool;
  pool.gold_index = 0;
  pool.candidates.push_back(problem.gold_answer);
  if (holes == 1) {
    for (char d = '0'; d <= '9'; ++d) {
      if (d == gold_fill[0]) continue;
      pool.candidates.push_back(apply_fill(mask, std::string(1, d)));
    }
    return pool;
  }

  std::set<std::string> seen{gold_fill};
  while (static_cast<int>(pool.candidates.size()) < pool_size) {
    std::string fill;
    for (std::size_t i = 0; i < holes; ++i)
      fill += static_cast<char>('0' + rng.uniform_int(10));
    if (!seen.insert(fill).second) continue;
    pool.candidates.push_back(apply_fill(mask, fill));
  }
  return pool;
}

Pool build_open_ended_pool(const Problem& problem, int pool_size) {
  Pool pool;
  pool.gold_index = 0;
  pool.candidates.push_back(problem.gold_answer);
  CanonicalAnswer gold = canonicalize(problem.gold_answer);
  for (int k = 1; static_cast<int>(pool.candidates.size()) < pool_size; ++k) {
    if (gold.numeric()) {
      pool.candidates.push_back(
          render_rational(gold.numerator + k * gold.denominator, gold.denominator));
    } else {
      pool.candidates.push_back("wrong-answer-" + std::to_string(k));
    }
  }
  return pool;
}

Pool build_mcq_pool(const Problem& problem, const Variant& variant) {
  Pool pool;
  pool.gold_index = 0;
  pool.candidates.push_back(problem.gold_answer);
  bool gold_seen = false;
  for (const std::string& option : variant.options) {
    if (!gold_seen && equivalent(option, problem.gold_answer)) {
      gold_seen = true;  // valid variants hold gold exactly once
      continue;
    }
    pool.candidates.push_back(option);
  }
  return pool;
}

}  // namespace

SimPolicy build_sim_policy(const Dataset& dataset, const SimPolicyConfig& config) {
  SimPolicy policy;
  policy.transfer = config.transfer;
  policy.learning_rate = config.learning_rate;
  for (std::size_t i = 0; i < dataset.problems.size(); ++i) {
    const Problem& problem = dataset.problems[i];
    auto& slots = policy.pools[problem.id];
    for (DifficultyLevel level : {DifficultyLevel::Mcq4, DifficultyLevel::Mcq10}) {
      const Variant* variant = dataset.variant(problem.id, level);
      if (variant && variant->validation.valid)
        slots[level_index(level)] = build_mcq_pool(problem, *variant);
    }
    const Variant* cloze = dataset.variant(problem.id, DifficultyLevel::Cloze);
    if (cloze && cloze->validation.valid) {
      Rng rng(derive_seed(config.rng_seed, 0x636c6f7a65ull, i));  // "cloze"
      slots[level_index(DifficultyLevel::Cloze)] =
          build_cloze_pool(problem, *cloze, config.cloze_pool_size, rng);
    }
    slots[level_index(DifficultyLevel::OpenEnded)] =
        build_open_ended_pool(problem, config.open_ended_pool_size);
  }
  return policy;
}

Eigen::ArrayXd pool_logits(const SimPolicy& policy, const std::string& problem_id,
                           DifficultyLevel level) {
  const Pool& pool = policy.pool(problem_id, level);
  Eigen::ArrayXd z = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(pool.candidates.size()));
  z[pool.gold_index] =
      policy.knowledge_logit(problem_id, level) + policy.format_bias[level_index(level)];
  return z;
}

Eigen::ArrayXd pool_probabilities(const SimPolicy& policy, const std::string& problem_id,
                                  DifficultyLevel level) {
  Eigen::ArrayXd z = pool_logits(policy, problem_id, level);
  Eigen::ArrayXd shifted = (z - z.maxCoeff()).exp();
  return shifted / shifted.sum();
}

double gold_probability(const SimPolicy& policy, const std::string& problem_id,
                        DifficultyLevel level) {
  const Pool& pool = policy.pool(problem_id, level);
  return pool_probabilities(policy, problem_id, level)[pool.gold_index];
}

RolloutGroup sample_rollouts(const SimPolicy& policy, const std::string& problem_id,
                             DifficultyLevel level, int m, std::uint64_t rng_seed,
                             const RewardConfig& reward) {
  if (m < 1) throw std::invalid_argument("sample_rollouts: m must be >= 1");
  const Pool& pool = policy.pool(problem_id, level);
  const std::string& gold = pool.candidates[pool.gold_index];
  Eigen::ArrayXd probs = pool_probabilities(policy, problem_id, level);

  RolloutGroup group;
  group.problem_id = problem_id;
  group.level = level;
  group.completions.reserve(m);
  group.candidate_indices.reserve(m);
  group.rewards = Eigen::ArrayXd::Zero(m);

  Rng rng(rng_seed);
  for (int j = 0; j < m; ++j) {
    const double u = rng.uniform01();
    double cdf = 0.0;
    Eigen::Index chosen = probs.size() - 1;
    for (Eigen::Index idx = 0; idx < probs.size(); ++idx) {
      cdf += probs[idx];
      if (u < cdf) {
        chosen = idx;
        break;
      }
    }
    group.candidate_indices.push_back(static_cast<int>(chosen));
    group.completions.push_back("\\boxed{" + pool.candidates[chosen] + "}");
    group.rewards[j] = score_completion(group.completions.back(), gold, reward).total();
  }
  group.advantages = normalize_group(group.rewards, reward.normalization_epsilon);
  return group;
}

double group_objective(const SimPolicy& policy, const RolloutGroup& group) {
  Eigen::ArrayXd z = pool_logits(policy, group.problem_id, group.level);
  const double max_z = z.maxCoeff();
  const double log_denom = max_z + std::log((z - max_z).exp().sum());
  double loss = 0.0;
  const int m = static_cast<int>(group.candidate_indices.size());
  for (int j = 0; j < m; ++j) {
    const double log_p = z[group.candidate_indices[j]] - log_denom;
    loss -= group.advantages[j] * log_p;
  }
  return loss / m;
}

GroupGradient group_gradient(const SimPolicy& policy, const RolloutGroup& group) {
  const Pool& pool = policy.pool(group.problem_id, group.level);
  const double p_gold = gold_probability(policy, group.problem_id, group.level);
  const int m = static_cast<int>(group.candidate_indices.size());
  double s = 0.0;
  for (int j = 0; j < m; ++j) {
    const double indicator = group.candidate_indices[j] == pool.gold_index ? 1.0 : 0.0;
    s += group.advantages[j] * (indicator - p_gold);
  }
  s /= m;
  GroupGradient grad;
  grad.knowledge = -s;
  grad.format_bias = -s;
  return grad;
}

void policy_gradient_update(SimPolicy& policy, const RolloutGroup& group) {
  GroupGradient grad = group_gradient(policy, group);
  if (grad.knowledge == 0.0 && grad.format_bias == 0.0) return;
  policy.bump(group.problem_id, group.level, -policy.learning_rate * grad.knowledge);
  policy.format_bias[level_index(group.level)] += -policy.learning_rate * grad.format_bias;
}

std::array<double, 4> transfer_probe(const SimPolicy& policy, const std::string& problem_id) {
  std::array<double, 4> out{};
  for (DifficultyLevel level : all_levels())
    out[level_index(level)] = gold_probability(policy, problem_id, level);
  return out;
}

namespace {

json pool_to_json(const Pool& pool) {
  return json{{"candidates", pool.candidates}, {"gold_index", pool.gold_index}};
}

Pool pool_from_json(const json& j) {
  Pool pool;
  pool.candidates = j.at("candidates").get<std::vector<std::string>>();
  pool.gold_index = j.at("gold_index").get<int>();
  if (pool.gold_index < 0 || pool.gold_index >= static_cast<int>(pool.candidates.size()))
    throw std::runtime_error("policy file: pool gold_index out of range");
  return pool;
}

}  // namespace

void save_policy(const std::string& path, const SimPolicy& policy, std::uint64_t master_seed,
                 std::int64_t next_step) {
  json j;
  j["transfer"] = policy.transfer;
  j["learning_rate"] = policy.learning_rate;
  j["format_bias"] = policy.format_bias;
  j["knowledge"] = policy.knowledge;
  j["knowledge_by_level"] = policy.knowledge_by_level;
  j["rng"] = {{"master_seed", master_seed}, {"next_step", next_step}};
  json pools = json::object();
  for (const auto& [problem_id, slots] : policy.pools) {
    json levels = json::object();
    for (DifficultyLevel level : all_levels()) {
      if (slots[level_index(level)])
        levels[std::to_string(level_value(level))] = pool_to_json(*slots[level_index(level)]);
    }
    pools[problem_id] = std::move(levels);
  }
  j["pools"] = std::move(pools);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  out << j.dump(2) << "\n";
}

SimPolicy load_policy(const std::string& path, std::uint64_t* master_seed,
                      std::int64_t* next_step) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read policy file: " + path);
  json j = json::parse(in);

  SimPolicy policy;
  policy.transfer = j.at("transfer").get<bool>();
  policy.learning_rate = j.at("learning_rate").get<double>();
  policy.format_bias = j.at("format_bias").get<std::array<double, 4>>();
  policy.knowledge = j.at("knowledge").get<std::map<std::string, double>>();
  policy.knowledge_by_level =
      j.at("knowledge_by_level").get<std::map<std::string, std::array<double, 4>>>();
  for (const auto& [problem_id, levels] : j.at("pools").items()) {
    auto& slots = policy.pools[problem_id];
    for (const auto& [level_key, pool_json] : levels.items()) {
      DifficultyLevel level = level_from_value(std::stoi(level_key));
      slots[level_index(level)] = pool_from_json(pool_json);
    }
  }
  if (master_seed) *master_seed = j.at("rng").at("master_seed").get<std::uint64_t>();
  if (next_step) *next_step = j.at("rng").at("next_step").get<std::int64_t>();
  return policy;
}

}  // namespace scaffold

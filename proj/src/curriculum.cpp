#include "scaffold/curriculum.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scaffold/rng.hpp"

namespace scaffold {

using nlohmann::json;

const CurriculumRecord* CurriculumState::find(const std::string& problem_id) const {
  auto it = index.find(problem_id);
  return it == index.end() ? nullptr : &records[it->second];
}

CurriculumState init_curriculum(const Dataset& dataset, const CurriculumConfig& config) {
  if (!(config.tau > 0.0 && config.tau <= 1.0))
    throw std::invalid_argument("init_curriculum: tau must be in (0, 1]");
  if (config.m < 1) throw std::invalid_argument("init_curriculum: m must be >= 1");

  CurriculumState state;
  state.config = config;
  for (const Problem& problem : dataset.problems) {
    if (!dataset.is_hard(problem.id)) continue;
    for (DifficultyLevel level : all_levels()) {
      const Variant* variant = dataset.variant(problem.id, level);
      if (!variant || !variant->validation.valid)
        throw std::runtime_error("init_curriculum: \"" + problem.id + "\" missing level " +
                                 std::to_string(level_value(level)) + " variant");
    }
    CurriculumRecord record;
    record.problem_id = problem.id;
    record.level = DifficultyLevel::Mcq4;
    state.index[problem.id] = state.records.size();
    state.records.push_back(std::move(record));
  }
  return state;
}

void record_outcomes(CurriculumState& state, const std::string& problem_id,
                     const std::vector<bool>& outcomes, std::int64_t step) {
  auto it = state.index.find(problem_id);
  if (it == state.index.end())
    throw std::runtime_error("record_outcomes: unknown problem id \"" + problem_id + "\"");
  CurriculumRecord& record = state.records[it->second];
  if (record.graduated)
    throw std::runtime_error("record_outcomes: problem \"" + problem_id + "\" already graduated");
  if (static_cast<int>(outcomes.size()) != state.config.m)
    throw std::runtime_error("record_outcomes: expected " + std::to_string(state.config.m) +
                             " outcomes, got " + std::to_string(outcomes.size()));

  int correct = static_cast<int>(std::count(outcomes.begin(), outcomes.end(), true));
  record.last_accuracy = static_cast<double>(correct) / static_cast<double>(state.config.m);
  if (record.last_accuracy < state.config.tau) return;

  if (record.level == DifficultyLevel::OpenEnded) {
    record.graduated = true;
    record.graduated_step = step;
    return;
  }
  DifficultyLevel next = level_from_value(level_value(record.level) + 1);
  record.promotions.push_back(Promotion{step, record.level, next});
  record.level = next;
}

namespace {

struct Ticket {
  std::size_t record_index;
  double weight;
};

std::vector<Ticket> eligible_tickets(const CurriculumState& state) {
  std::vector<Ticket> tickets;
  for (std::size_t i = 0; i < state.records.size(); ++i) {
    const CurriculumRecord& record = state.records[i];
    if (state.config.static_mixture) {
      tickets.push_back({i, 1.0});
    } else if (!record.graduated) {
      tickets.push_back({i, 1.0});
    } else if (state.config.graduation == GraduationPolicy::Downweight) {
      tickets.push_back({i, state.config.downweight_factor});
    }
  }
  return tickets;
}

std::size_t draw_weighted(std::vector<Ticket>& tickets, Rng& rng) {
  double total = 0.0;
  for (const Ticket& t : tickets) total += t.weight;
  const double u = rng.uniform01() * total;
  double cdf = 0.0;
  std::size_t chosen = tickets.size() - 1;
  for (std::size_t i = 0; i < tickets.size(); ++i) {
    cdf += tickets[i].weight;
    if (u < cdf) {
      chosen = i;
      break;
    }
  }
  std::size_t record_index = tickets[chosen].record_index;
  tickets.erase(tickets.begin() + static_cast<std::ptrdiff_t>(chosen));
  return record_index;
}

}  // namespace

std::vector<BatchEntry> compose_batch(const CurriculumState& state, const Dataset& dataset,
                                      int batch_size, std::uint64_t rng_seed) {
  if (batch_size < 1) throw std::invalid_argument("compose_batch: batch_size must be >= 1");

  Rng rng(rng_seed);
  std::vector<BatchEntry> batch;
  std::vector<Ticket> pool;
  while (static_cast<int>(batch.size()) < batch_size) {
    if (pool.empty()) {
      pool = eligible_tickets(state);
      if (pool.empty()) return {};  // training-complete
    }
    const CurriculumRecord& record = state.records[draw_weighted(pool, rng)];
    DifficultyLevel level =
        state.config.static_mixture ? level_from_value(rng.uniform_index(4) + 1) : record.level;
    const Variant* variant = dataset.variant(record.problem_id, level);
    if (!variant)
      throw std::runtime_error("compose_batch: \"" + record.problem_id + "\" missing level " +
                               std::to_string(level_value(level)) + " variant");
    batch.push_back(BatchEntry{record.problem_id, level, *variant});
  }
  return batch;
}

std::array<double, 4> level_histogram(const CurriculumState& state) {
  std::array<double, 4> counts{};
  double active = 0.0;
  for (const CurriculumRecord& record : state.records) {
    if (record.graduated) continue;
    counts[level_index(record.level)] += 1.0;
    active += 1.0;
  }
  if (active > 0.0)
    for (double& c : counts) c /= active;
  return counts;
}

std::array<double, 4> level_histogram_with_graduated(const CurriculumState& state) {
  std::array<double, 4> counts{};
  if (state.records.empty()) return counts;
  for (const CurriculumRecord& record : state.records) {
    DifficultyLevel level = record.graduated ? DifficultyLevel::OpenEnded : record.level;
    counts[level_index(level)] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(state.records.size());
  return counts;
}

bool curriculum_complete(const CurriculumState& state) {
  return std::all_of(state.records.begin(), state.records.end(),
                     [](const CurriculumRecord& r) { return r.graduated; });
}

namespace {

std::string graduation_name(GraduationPolicy policy) {
  return policy == GraduationPolicy::Retire ? "retire" : "downweight";
}

GraduationPolicy graduation_from_name(const std::string& name) {
  if (name == "retire") return GraduationPolicy::Retire;
  if (name == "downweight") return GraduationPolicy::Downweight;
  throw std::runtime_error("curriculum file: unknown graduation policy \"" + name + "\"");
}

}  // namespace

void save_curriculum(const std::string& path, const CurriculumState& state,
                     const TrainerMeta& meta) {
  json records = json::array();
  for (const CurriculumRecord& record : state.records) {
    json promotions = json::array();
    for (const Promotion& p : record.promotions)
      promotions.push_back({{"step", p.step},
                            {"from", level_value(p.from)},
                            {"to", level_value(p.to)}});
    records.push_back({{"problem_id", record.problem_id},
                       {"level", level_value(record.level)},
                       {"last_accuracy", record.last_accuracy},
                       {"promotions", std::move(promotions)},
                       {"graduated", record.graduated},
                       {"graduated_step", record.graduated_step}});
  }
  json j{
      {"config",
       {{"tau", state.config.tau},
        {"m", state.config.m},
        {"graduation", graduation_name(state.config.graduation)},
        {"downweight_factor", state.config.downweight_factor},
        {"static_mixture", state.config.static_mixture}}},
      {"records", std::move(records)},
      {"trainer",
       {{"master_seed", meta.master_seed},
        {"next_step", meta.next_step},
        {"mode", meta.mode},
        {"batch_size", meta.batch_size},
        {"rollout_n", meta.rollout_n},
        {"cumulative_rollouts", meta.cumulative_rollouts}}},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curriculum file: " + path);
  out << j.dump(2) << "\n";
}

CurriculumState load_curriculum(const std::string& path, TrainerMeta* meta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read curriculum file: " + path);
  json j = json::parse(in);

  CurriculumState state;
  const json& config = j.at("config");
  state.config.tau = config.at("tau").get<double>();
  state.config.m = config.at("m").get<int>();
  state.config.graduation = graduation_from_name(config.at("graduation").get<std::string>());
  state.config.downweight_factor = config.at("downweight_factor").get<double>();
  state.config.static_mixture = config.at("static_mixture").get<bool>();

  for (const json& record_json : j.at("records")) {
    CurriculumRecord record;
    record.problem_id = record_json.at("problem_id").get<std::string>();
    record.level = level_from_value(record_json.at("level").get<int>());
    record.last_accuracy = record_json.at("last_accuracy").get<double>();
    record.graduated = record_json.at("graduated").get<bool>();
    record.graduated_step = record_json.at("graduated_step").get<std::int64_t>();
    for (const json& p : record_json.at("promotions"))
      record.promotions.push_back(Promotion{p.at("step").get<std::int64_t>(),
                                            level_from_value(p.at("from").get<int>()),
                                            level_from_value(p.at("to").get<int>())});
    state.index[record.problem_id] = state.records.size();
    state.records.push_back(std::move(record));
  }

  if (meta) {
    const json& trainer = j.at("trainer");
    meta->master_seed = trainer.at("master_seed").get<std::uint64_t>();
    meta->next_step = trainer.at("next_step").get<std::int64_t>();
    meta->mode = trainer.at("mode").get<std::string>();
    meta->batch_size = trainer.at("batch_size").get<int>();
    meta->rollout_n = trainer.at("rollout_n").get<int>();
    meta->cumulative_rollouts = trainer.at("cumulative_rollouts").get<std::int64_t>();
  }
  return state;
}

}  // namespace scaffold

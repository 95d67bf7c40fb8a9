#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scaffold/dataset.hpp"

namespace scaffold {

enum class GraduationPolicy { Retire, Downweight };

struct CurriculumConfig {
  double tau = 0.5;  // promotion threshold, inclusive
  int m = 8;         // rollouts per instance per step
  GraduationPolicy graduation = GraduationPolicy::Retire;
  double downweight_factor = 0.25;
  // Ablation: ignore per-instance levels and draw each format with equal
  // probability. Promotion bookkeeping is bypassed entirely in this mode.
  bool static_mixture = false;
};

struct Promotion {
  std::int64_t step = 0;
  DifficultyLevel from = DifficultyLevel::Mcq4;
  DifficultyLevel to = DifficultyLevel::Mcq4;
};

struct CurriculumRecord {
  std::string problem_id;
  DifficultyLevel level = DifficultyLevel::Mcq4;
  double last_accuracy = 0.0;
  std::vector<Promotion> promotions;
  bool graduated = false;
  std::int64_t graduated_step = -1;
};

struct CurriculumState {
  CurriculumConfig config;
  std::vector<CurriculumRecord> records;  // dataset order
  std::map<std::string, std::size_t> index;

  const CurriculumRecord* find(const std::string& problem_id) const;
};

// Trainer bookkeeping persisted with every checkpoint so a resumed run
// replays the same seed stream from the same step with the same shape.
struct TrainerMeta {
  std::uint64_t master_seed = 0;
  std::int64_t next_step = 0;
  std::string mode = "adaptive";
  int batch_size = 8;
  int rollout_n = 8;
  std::int64_t cumulative_rollouts = 0;
};

// One record per hard-flagged problem, level 1, accuracy 0. Every hard
// problem must carry a valid variant at all four levels.
CurriculumState init_curriculum(const Dataset& dataset, const CurriculumConfig& config);

// Folds one group of m outcomes into the record: last_accuracy becomes the
// group mean, and accuracy >= tau promotes one level (graduates at level 4).
void record_outcomes(CurriculumState& state, const std::string& problem_id,
                     const std::vector<bool>& outcomes, std::int64_t step);

struct BatchEntry {
  std::string problem_id;
  DifficultyLevel level = DifficultyLevel::Mcq4;
  Variant variant;
};

// Draws batch_size problems without replacement, cycling with a fresh draw
// order once the eligible pool runs out. Adaptive mode pairs each problem
// with its current-level variant; graduated records are dropped under Retire
// and kept at reduced weight under Downweight. Static mode draws the level
// uniformly per entry. An empty result signals training-complete (every
// record graduated under Retire).
std::vector<BatchEntry> compose_batch(const CurriculumState& state, const Dataset& dataset,
                                      int batch_size, std::uint64_t rng_seed);

// Level shares over non-graduated records; all zeros when none remain.
std::array<double, 4> level_histogram(const CurriculumState& state);

// Level shares over all records with graduated ones counted at level 4: the
// monotone progress view used for curriculum-dynamics plots.
std::array<double, 4> level_histogram_with_graduated(const CurriculumState& state);

bool curriculum_complete(const CurriculumState& state);

void save_curriculum(const std::string& path, const CurriculumState& state,
                     const TrainerMeta& meta);
CurriculumState load_curriculum(const std::string& path, TrainerMeta* meta = nullptr);

}  // namespace scaffold

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scaffold {

// Difficulty levels order the reformulated formats from most constrained to
// fully open-ended. The integer values are part of the on-disk schema.
enum class DifficultyLevel : int { Mcq4 = 1, Mcq10 = 2, Cloze = 3, OpenEnded = 4 };

constexpr int kNumLevels = 4;

constexpr int level_value(DifficultyLevel level) { return static_cast<int>(level); }
constexpr int level_index(DifficultyLevel level) { return static_cast<int>(level) - 1; }
DifficultyLevel level_from_value(int value);  // throws on values outside 1..4
std::string_view level_name(DifficultyLevel level);
constexpr std::array<DifficultyLevel, kNumLevels> all_levels() {
  return {DifficultyLevel::Mcq4, DifficultyLevel::Mcq10, DifficultyLevel::Cloze,
          DifficultyLevel::OpenEnded};
}

struct Problem {
  std::string id;
  std::string question;
  std::string gold_answer;
  std::string source;
  std::optional<double> pass_rate_prior;
};

struct Validation {
  bool valid = false;
  std::string reason;  // set iff invalid

  static Validation ok() { return {true, {}}; }
  static Validation fail(std::string why) { return {false, std::move(why)}; }
};

// A reformulated rendering of one problem at one difficulty level. Options
// are present exactly for MCQ levels, the mask exactly for cloze; the
// open-ended variant is the identity rendering of the original question.
struct Variant {
  std::string problem_id;
  DifficultyLevel level = DifficultyLevel::OpenEnded;
  std::string prompt;
  std::vector<std::string> options;
  std::string mask;
  Validation validation;
};

struct Dataset {
  std::vector<Problem> problems;
  std::map<std::string, std::array<std::optional<Variant>, kNumLevels>> variants;
  std::map<std::string, bool> hard_flag;

  const Problem* find(std::string_view id) const;
  const Variant* variant(const std::string& id, DifficultyLevel level) const;
  bool is_hard(const std::string& id) const;
  std::vector<const Problem*> hard_problems() const;  // dataset order
  // True when all four levels are attached and valid.
  bool ready_for_training(const std::string& id) const;
};

// JSON Lines dataset file: one problem object per line. Malformed lines and
// duplicate ids are reported with their line number.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Preconditions: the variant is valid and its problem_id resolves.
// Re-attaching a level replaces the previous variant.
void attach_variant(Dataset& dataset, Variant variant);

// Variant sidecar JSONL. Loaded variants carry an "unvalidated" verdict until
// validate_variant has seen the gold answer.
std::vector<Variant> load_variants(const std::filesystem::path& path);
void save_variants(std::span<const Variant> variants, const std::filesystem::path& path);

void load_hard_set(Dataset& dataset, const std::filesystem::path& path);
void save_hard_set(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace scaffold

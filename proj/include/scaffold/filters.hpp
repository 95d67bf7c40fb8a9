#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scaffold/dataset.hpp"
#include "scaffold/provider.hpp"

namespace scaffold {

struct FilterVerdict {
  std::string problem_id;
  std::string filter;  // "binary" | "silver"
  bool kept = false;
  std::vector<std::string> judge_answers;  // silver only
  std::string note;
};

// Open-ended solve prompt used for hard-set sampling and judge solutions.
std::string solve_prompt(const Problem& problem);

// Asks for a single ANSWERABLE / UNANSWERABLE token.
std::string answerability_prompt(const Problem& problem);

struct HardSetProgress {
  std::string problem_id;
  int n = 0;
  int c = 0;
  bool hard = false;
};

// Flags a problem hard iff none of its n sampled completions grade correct.
// Progress is reported per problem before moving on, so a provider failure
// mid-run leaves every finished verdict persisted by the caller.
void build_hard_set(Dataset& dataset, RolloutProvider& provider, int n, std::uint64_t seed,
                    const std::function<void(const HardSetProgress&)>& on_progress = {});

// Keeps a problem iff a strict majority of judge answers is equivalent to
// gold. Unparseable judge output counts as a non-matching vote. Fail-closed:
// ties drop. runs must be odd. Operates on hard-flagged problems when any
// exist, else on the whole dataset.
std::vector<FilterVerdict> silver_answer_filter(const Dataset& dataset, RolloutProvider& judge,
                                                int runs, std::uint64_t seed);

// Keeps a problem iff the judge's reply contains the whole token ANSWERABLE
// and not UNANSWERABLE. Unparseable verdicts drop. Same scope rule as the
// silver filter.
std::vector<FilterVerdict> binary_filter(const Dataset& dataset, RolloutProvider& judge,
                                         std::uint64_t seed);

// Removes dropped problems with their variants and hard flags. Returns the
// number removed.
std::size_t apply_filter(Dataset& dataset, const std::vector<FilterVerdict>& verdicts);

}  // namespace scaffold

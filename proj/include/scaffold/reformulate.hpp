#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scaffold/dataset.hpp"

namespace scaffold {

// Masked rendering of a gold answer: '_' placeholders over digits only, with
// at least one digit masked and at least one digit left visible.
struct MaskSpec {
  std::string mask;
  double masked_fraction = 0.0;
};

enum class DistractorStrategy {
  OffByOne,
  SignFlip,
  DigitSwap,
  Double,
  Halve,
  MagnitudeShift,
};

// Deterministic distractor generation for numeric gold answers. Strategies
// are applied in order, then re-applied to earlier distractors until enough
// pairwise non-equivalent values exist. The seed only places the gold option.
struct DistractorPolicy {
  std::vector<DistractorStrategy> strategies = {
      DistractorStrategy::OffByOne,  DistractorStrategy::SignFlip,
      DistractorStrategy::DigitSwap, DistractorStrategy::Double,
      DistractorStrategy::Halve,     DistractorStrategy::MagnitudeShift,
  };
  std::uint64_t rng_seed = 0;
};

// Builds a valid MCQ variant with n_options in {4, 10}; the gold answer is
// stored verbatim at a seeded-random position. Throws when the gold answer is
// not numeric or the policy cannot yield enough distinct distractors; those
// problems go through the LLM reformulation path instead.
Variant build_mcq(const Problem& problem, int n_options, const DistractorPolicy& policy);

// Builds a valid cloze variant masking 50-80% of the gold answer's digits.
// Requires at least two digits so one can be masked and one revealed.
Variant build_cloze(const Problem& problem, std::uint64_t rng_seed);

MaskSpec make_mask(std::string_view gold, std::uint64_t rng_seed);

// Valid iff the option count matches the level and exactly one option is
// equivalent to the gold answer.
Validation validate_mcq(const Variant& variant, std::string_view gold);

// Valid iff the mask aligns with the gold answer character by character,
// placeholders cover digits only, at least one placeholder exists and at
// least one digit stays revealed.
Validation validate_cloze(std::string_view mask, std::string_view gold);

// Dispatches to the level validator; open-ended variants are valid iff their
// prompt is the original question.
Validation validate_variant(const Variant& variant, const Problem& problem);

// LLM reformulation prompts, keyed by target level (MCQ-4, MCQ-10, cloze).
std::string reformulation_prompt_template(DifficultyLevel level);
std::string render_reformulation_prompt(const Problem& problem, DifficultyLevel level);

// Parses an LLM reformulation response into a Variant carrying its verdict:
// invalid("format parse failure") when the layout cannot be read,
// invalid("letter/gold mismatch") when the declared correct option is not the
// gold answer, otherwise the level validator's verdict.
Variant parse_reformulation_response(std::string_view response, DifficultyLevel level,
                                     const Problem& problem);

// The open-ended variant is the identity rendering; keeping it as a Variant
// lets the curriculum treat all four levels uniformly.
Variant make_open_ended_variant(const Problem& problem);

// Gold answers with several separate digit runs that do not parse as a single
// number (coordinate pairs, ranges) get masked per digit run but are flagged
// for human review.
bool needs_mask_review(std::string_view gold);

std::string mcq_option_line(const std::vector<std::string>& options);

// Revalidates stored variants against their problems and attaches them.
// Sidecar files carry no trusted verdicts; a variant that fails validation
// here means the dataset and sidecar are out of sync.
void attach_stored_variants(Dataset& dataset, std::vector<Variant> variants);

}  // namespace scaffold

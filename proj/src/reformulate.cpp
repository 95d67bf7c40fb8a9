#include "scaffold/reformulate.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "scaffold/answer.hpp"
#include "scaffold/rng.hpp"

namespace scaffold {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::size_t> digit_positions(std::string_view s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (is_digit(s[i])) out.push_back(i);
  return out;
}

struct Value {
  BigInt num;
  BigInt den;  // > 0, reduced
};

bool operator<(const Value& a, const Value& b) {
  if (a.num != b.num) return a.num < b.num;
  return a.den < b.den;
}

Value reduce(BigInt num, BigInt den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  BigInt g = boost::multiprecision::gcd(num < 0 ? BigInt(-num) : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  return Value{std::move(num), std::move(den)};
}

// Swap the first adjacent pair of distinct digits in the numerator's decimal
// form; no candidate when every adjacent pair matches.
std::optional<Value> digit_swap(const Value& v) {
  BigInt mag = v.num < 0 ? BigInt(-v.num) : v.num;
  std::string digits = mag.str();
  for (std::size_t i = 0; i + 1 < digits.size(); ++i) {
    if (digits[i] != digits[i + 1]) {
      std::swap(digits[i], digits[i + 1]);
      // A swap can move a zero to the front; cpp_int would read that as an
      // octal prefix, and the decimal form is what the swap means anyway.
      std::size_t nonzero = digits.find_first_not_of('0');
      BigInt swapped(nonzero == std::string::npos ? "0" : digits.substr(nonzero));
      if (v.num < 0) swapped = -swapped;
      return reduce(std::move(swapped), v.den);
    }
  }
  return std::nullopt;
}

std::vector<Value> apply_strategy(DistractorStrategy strategy, const Value& v) {
  switch (strategy) {
    case DistractorStrategy::OffByOne:
      return {reduce(v.num + v.den, v.den), reduce(v.num - v.den, v.den)};
    case DistractorStrategy::SignFlip:
      return {Value{-v.num, v.den}};
    case DistractorStrategy::DigitSwap: {
      auto swapped = digit_swap(v);
      if (!swapped) return {};
      return {*swapped};
    }
    case DistractorStrategy::Double:
      return {reduce(v.num * 2, v.den)};
    case DistractorStrategy::Halve:
      return {reduce(v.num, v.den * 2)};
    case DistractorStrategy::MagnitudeShift:
      return {reduce(v.num * 10, v.den), reduce(v.num, v.den * 10)};
  }
  return {};
}

char option_letter(std::size_t index) { return static_cast<char>('A' + index); }

// "Question: ..." / "A. ..." / "Correct Answer: X" layout of the MCQ
// reformulation responses. Fields are std::nullopt until seen.
struct McqLayout {
  std::optional<std::string> question;
  std::vector<std::string> options;
  std::optional<char> correct_letter;
};

std::optional<McqLayout> parse_mcq_layout(std::string_view response, int n_options) {
  McqLayout out;
  std::istringstream lines{std::string(response)};
  std::string raw;
  bool in_question = false;
  while (std::getline(lines, raw)) {
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.rfind("Question:", 0) == 0) {
      if (out.question) return std::nullopt;
      out.question = trim(line.substr(9));
      in_question = true;
      continue;
    }
    if (line.size() >= 2 && line[0] == option_letter(out.options.size()) &&
        line[1] == '.' && static_cast<int>(out.options.size()) < n_options) {
      out.options.push_back(trim(line.substr(2)));
      in_question = false;
      continue;
    }
    if (line.rfind("Correct Answer:", 0) == 0) {
      std::string letter = trim(line.substr(15));
      if (letter.size() != 1) return std::nullopt;
      out.correct_letter = letter[0];
      in_question = false;
      continue;
    }
    // Continuation lines extend the question until the first option appears.
    if (in_question) {
      *out.question += "\n" + line;
      continue;
    }
    return std::nullopt;
  }
  if (!out.question || out.question->empty()) return std::nullopt;
  if (static_cast<int>(out.options.size()) != n_options) return std::nullopt;
  if (!out.correct_letter) return std::nullopt;
  int idx = *out.correct_letter - 'A';
  if (idx < 0 || idx >= n_options) return std::nullopt;
  return out;
}

}  // namespace

std::string mcq_option_line(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) out += " ";
    out += option_letter(i);
    out += ". ";
    out += options[i];
  }
  return out;
}

Variant build_mcq(const Problem& problem, int n_options, const DistractorPolicy& policy) {
  if (n_options != 4 && n_options != 10)
    throw std::invalid_argument("build_mcq: n_options must be 4 or 10");
  CanonicalAnswer gold = canonicalize(problem.gold_answer);
  if (!gold.numeric())
    throw std::runtime_error("build_mcq: gold answer \"" + problem.gold_answer +
                             "\" is not numeric; use the LLM reformulation path");

  Value gold_value = reduce(gold.numerator, gold.denominator);
  std::set<Value> seen{gold_value};
  std::deque<Value> frontier{gold_value};
  std::vector<Value> distractors;
  const int needed = n_options - 1;
  while (static_cast<int>(distractors.size()) < needed && !frontier.empty()) {
    Value base = frontier.front();
    frontier.pop_front();
    for (DistractorStrategy strategy : policy.strategies) {
      for (Value& candidate : apply_strategy(strategy, base)) {
        if (static_cast<int>(distractors.size()) >= needed) break;
        if (!seen.insert(candidate).second) continue;
        frontier.push_back(candidate);
        distractors.push_back(candidate);
      }
    }
  }
  if (static_cast<int>(distractors.size()) < needed)
    throw std::runtime_error("build_mcq: cannot produce " + std::to_string(needed) +
                             " distinct distractors for gold \"" + problem.gold_answer +
                             "\"; use the LLM reformulation path");

  Rng rng(policy.rng_seed);
  std::size_t gold_slot = rng.uniform_index(n_options);
  std::vector<std::string> options;
  options.reserve(n_options);
  std::size_t next = 0;
  for (int i = 0; i < n_options; ++i) {
    if (static_cast<std::size_t>(i) == gold_slot) {
      options.push_back(problem.gold_answer);
    } else {
      const Value& v = distractors[next++];
      options.push_back(render_rational(v.num, v.den));
    }
  }

  Variant variant;
  variant.problem_id = problem.id;
  variant.level = n_options == 4 ? DifficultyLevel::Mcq4 : DifficultyLevel::Mcq10;
  variant.options = std::move(options);
  variant.prompt = problem.question + " " + mcq_option_line(variant.options);
  variant.validation = validate_mcq(variant, problem.gold_answer);
  return variant;
}

MaskSpec make_mask(std::string_view gold, std::uint64_t rng_seed) {
  std::vector<std::size_t> digits = digit_positions(gold);
  const std::size_t d = digits.size();
  if (d < 2)
    throw std::runtime_error("make_mask: gold answer \"" + std::string(gold) +
                             "\" has fewer than 2 digits; cannot both mask and reveal");
  std::size_t lo = (d + 1) / 2;           // ceil(0.5 d)
  std::size_t hi = (d * 8) / 10;          // floor(0.8 d)
  hi = std::min(hi, d - 1);               // keep one digit revealed
  if (hi < lo) hi = lo;
  Rng rng(rng_seed);
  std::size_t k = lo + rng.uniform_int(hi - lo + 1);
  rng.shuffle(digits);
  MaskSpec spec;
  spec.mask = std::string(gold);
  for (std::size_t i = 0; i < k; ++i) spec.mask[digits[i]] = '_';
  spec.masked_fraction = static_cast<double>(k) / static_cast<double>(d);
  return spec;
}

Variant build_cloze(const Problem& problem, std::uint64_t rng_seed) {
  MaskSpec spec = make_mask(problem.gold_answer, rng_seed);
  Variant variant;
  variant.problem_id = problem.id;
  variant.level = DifficultyLevel::Cloze;
  variant.mask = spec.mask;
  variant.prompt = problem.question + " The answer should look like: " + spec.mask +
                   ". Fill the blank by giving the full answer.";
  variant.validation = validate_cloze(spec.mask, problem.gold_answer);
  return variant;
}

Validation validate_mcq(const Variant& variant, std::string_view gold) {
  std::size_t expected = variant.level == DifficultyLevel::Mcq4 ? 4 : 10;
  if (variant.options.size() != expected) return Validation::fail("option count mismatch");
  int matches = 0;
  for (const std::string& option : variant.options)
    if (equivalent(option, gold)) ++matches;
  if (matches == 0) return Validation::fail("gold absent");
  if (matches > 1) return Validation::fail("gold not unique");
  return Validation::ok();
}

Validation validate_cloze(std::string_view mask, std::string_view gold) {
  if (mask.size() != gold.size()) return Validation::fail("mask length mismatch");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == '_') {
      if (!is_digit(gold[i])) return Validation::fail("placeholder over non-digit");
    } else if (mask[i] != gold[i]) {
      return Validation::fail(is_digit(gold[i]) ? "revealed digit mismatch"
                                                : "revealed character mismatch");
    }
  }
  if (mask.find('_') == std::string_view::npos) return Validation::fail("no placeholder");
  bool digit_revealed = false;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] != '_' && is_digit(mask[i])) digit_revealed = true;
  if (!digit_revealed) return Validation::fail("no digit revealed");
  return Validation::ok();
}

Validation validate_variant(const Variant& variant, const Problem& problem) {
  switch (variant.level) {
    case DifficultyLevel::Mcq4:
    case DifficultyLevel::Mcq10:
      return validate_mcq(variant, problem.gold_answer);
    case DifficultyLevel::Cloze:
      return validate_cloze(variant.mask, problem.gold_answer);
    case DifficultyLevel::OpenEnded:
      if (variant.prompt != problem.question) return Validation::fail("prompt altered");
      return Validation::ok();
  }
  return Validation::fail("unknown level");
}

namespace {

constexpr std::string_view kMcq4Prompt =
    R"(Please create a multiple-choice question with 4 options (A, B, C, D) based on the following math problem and its correct answer.

Original Question: {question}
Correct Answer: {gold_answer}

Requirements:
1. Keep the original question
2. Add 4 options (A, B, C, D)
3. One option should be the correct answer
4. The other 3 options should be plausible but incorrect distractors
5. Randomly place the correct answer among the options

Output format:
Question: [the question]
A. [option A]
B. [option B]
C. [option C]
D. [option D]

Correct Answer: [letter of correct option]
Only output in this exact format, nothing else.
)";

constexpr std::string_view kMcq10Prompt =
    R"(Please create a multiple-choice question with 10 options (A, B, C, D, E, F, G, H, I, J) based on the following math problem and its correct answer.

Original Question: {question}
Correct Answer: {gold_answer}

Requirements:
1. Keep the original question
2. Add 10 options (A, B, C, D, E, F, G, H, I, J)
3. One option should be the correct answer
4. The other 9 options should be plausible but incorrect distractors
5. Randomly place the correct answer among the options

Output format:
Question: [the question]
A. [option A]
B. [option B]
C. [option C]
D. [option D]
E. [option E]
F. [option F]
G. [option G]
H. [option H]
I. [option I]
J. [option J]

Correct Answer: [letter of correct option]
Only output in this exact format, nothing else.
)";

constexpr std::string_view kClozePrompt =
    R"(Your task is to produce a masked version of the correct answer by replacing some digits with underscores (_).

Requirements:
1. Masked answer is the correct answer with some digits replaced by underscores (_)
2. Preserve LaTeX formatting in the masked answer (e.g., if answer is \frac{1}{2}, mask it as \frac{1}{_} or similar)
3. Mask approximately 50-80% of the digits, keeping at least one digit visible
4. Only mask numbers, not letters or latex symbols

Output format:
\boxed{[masked answer with underscores only]}

Examples:
If the answer is 1003, output: \boxed{1__3} or \boxed{__03}
If the answer is \frac{5}{8}, output: \boxed{\frac{5}{_}} or \boxed{\frac{_}{8}}

Only output the masked answer in \boxed{}, nothing else.

Original Question: {question}
Correct Answer: {gold_answer}
Masked Answer: )";

void replace_all(std::string& text, std::string_view key, std::string_view value) {
  std::size_t at = 0;
  while ((at = text.find(key, at)) != std::string::npos) {
    text.replace(at, key.size(), value);
    at += value.size();
  }
}

}  // namespace

std::string reformulation_prompt_template(DifficultyLevel level) {
  switch (level) {
    case DifficultyLevel::Mcq4:
      return std::string(kMcq4Prompt);
    case DifficultyLevel::Mcq10:
      return std::string(kMcq10Prompt);
    case DifficultyLevel::Cloze:
      return std::string(kClozePrompt);
    case DifficultyLevel::OpenEnded:
      break;
  }
  throw std::invalid_argument(
      "reformulation_prompt_template: open-ended is the identity reformulation; no prompt exists");
}

std::string render_reformulation_prompt(const Problem& problem, DifficultyLevel level) {
  std::string text = reformulation_prompt_template(level);
  replace_all(text, "{question}", problem.question);
  replace_all(text, "{gold_answer}", problem.gold_answer);
  return text;
}

Variant parse_reformulation_response(std::string_view response, DifficultyLevel level,
                                     const Problem& problem) {
  Variant variant;
  variant.problem_id = problem.id;
  variant.level = level;

  if (level == DifficultyLevel::OpenEnded)
    throw std::invalid_argument("parse_reformulation_response: open-ended has no response to parse");

  if (level == DifficultyLevel::Cloze) {
    std::optional<std::string> boxed = extract_boxed(response);
    if (!boxed) {
      variant.validation = Validation::fail("format parse failure");
      return variant;
    }
    variant.mask = trim(*boxed);
    variant.prompt = problem.question + " The answer should look like: " + variant.mask +
                     ". Fill the blank by giving the full answer.";
    variant.validation = validate_cloze(variant.mask, problem.gold_answer);
    return variant;
  }

  int n_options = level == DifficultyLevel::Mcq4 ? 4 : 10;
  std::optional<McqLayout> layout = parse_mcq_layout(response, n_options);
  if (!layout) {
    variant.validation = Validation::fail("format parse failure");
    return variant;
  }
  const std::string& declared = layout->options[*layout->correct_letter - 'A'];
  if (!equivalent(declared, problem.gold_answer)) {
    variant.validation = Validation::fail("letter/gold mismatch");
    return variant;
  }
  variant.options = layout->options;
  variant.prompt = *layout->question + " " + mcq_option_line(variant.options);
  variant.validation = validate_mcq(variant, problem.gold_answer);
  return variant;
}

Variant make_open_ended_variant(const Problem& problem) {
  Variant variant;
  variant.problem_id = problem.id;
  variant.level = DifficultyLevel::OpenEnded;
  variant.prompt = problem.question;
  variant.validation = Validation::ok();
  return variant;
}

void attach_stored_variants(Dataset& dataset, std::vector<Variant> variants) {
  for (Variant& variant : variants) {
    const Problem* problem = dataset.find(variant.problem_id);
    if (!problem)
      throw std::runtime_error("stored variant references unknown problem id \"" +
                               variant.problem_id + "\"");
    variant.validation = validate_variant(variant, *problem);
    if (!variant.validation.valid)
      throw std::runtime_error("stored variant for \"" + variant.problem_id + "\" at level " +
                               std::to_string(level_value(variant.level)) +
                               " failed validation: " + variant.validation.reason);
    attach_variant(dataset, std::move(variant));
  }
}

bool needs_mask_review(std::string_view gold) {
  int runs = 0;
  bool in_run = false;
  for (char c : gold) {
    if (is_digit(c)) {
      if (!in_run) ++runs;
      in_run = true;
    } else {
      in_run = false;
    }
  }
  return runs >= 2 && !canonicalize(gold).numeric();
}

}  // namespace scaffold

#include "scaffold/filters.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "scaffold/answer.hpp"
#include "scaffold/grpo.hpp"
#include "scaffold/rng.hpp"

namespace scaffold {

std::string solve_prompt(const Problem& problem) {
  return problem.question +
         "\n\nPlease reason step by step, and put your final answer within \\boxed{}.";
}

std::string answerability_prompt(const Problem& problem) {
  return "Decide whether the following math problem is complete, self-contained, and answerable "
         "exactly as written. A problem is not answerable if it depends on missing material "
         "(for example a figure that is not provided), is ambiguous, or asks for something that "
         "cannot be produced as a single final answer.\n\nProblem: " +
         problem.question + "\n\nReply with a single word: ANSWERABLE or UNANSWERABLE.";
}

namespace {

// Filters run on the hard set when one exists; before hard-set construction
// they apply to everything.
std::vector<const Problem*> filter_scope(const Dataset& dataset) {
  std::vector<const Problem*> scope;
  bool any_hard = false;
  for (const Problem& problem : dataset.problems)
    if (dataset.is_hard(problem.id)) any_hard = true;
  for (const Problem& problem : dataset.problems)
    if (!any_hard || dataset.is_hard(problem.id)) scope.push_back(&problem);
  return scope;
}

std::vector<std::string> tokens_upper(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      current += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace

void build_hard_set(Dataset& dataset, RolloutProvider& provider, int n, std::uint64_t seed,
                    const std::function<void(const HardSetProgress&)>& on_progress) {
  if (n < 1) throw std::invalid_argument("build_hard_set: n must be >= 1");
  for (std::size_t i = 0; i < dataset.problems.size(); ++i) {
    const Problem& problem = dataset.problems[i];
    RolloutRequest request;
    request.problem_id = problem.id;
    request.level = DifficultyLevel::OpenEnded;
    request.prompt = solve_prompt(problem);
    request.n = n;
    request.seed = derive_seed(seed, 1, i);
    std::vector<std::string> completions = provider.complete(request);

    int correct = 0;
    for (const std::string& completion : completions)
      if (score_completion(completion, problem.gold_answer).correct > 0.0) ++correct;
    const bool hard = correct == 0;
    dataset.hard_flag[problem.id] = hard;
    if (on_progress)
      on_progress(HardSetProgress{problem.id, static_cast<int>(completions.size()), correct, hard});
  }
}

std::vector<FilterVerdict> silver_answer_filter(const Dataset& dataset, RolloutProvider& judge,
                                                int runs, std::uint64_t seed) {
  if (runs < 1 || runs % 2 == 0)
    throw std::invalid_argument("silver_answer_filter: runs must be odd so majority is defined");
  std::vector<FilterVerdict> verdicts;
  std::vector<const Problem*> scope = filter_scope(dataset);
  for (std::size_t i = 0; i < scope.size(); ++i) {
    const Problem& problem = *scope[i];
    FilterVerdict verdict;
    verdict.problem_id = problem.id;
    verdict.filter = "silver";

    int matches = 0;
    int unparsed = 0;
    for (int run = 0; run < runs; ++run) {
      RolloutRequest request;
      request.problem_id = problem.id;
      request.level = DifficultyLevel::OpenEnded;
      request.prompt = solve_prompt(problem);
      request.n = 1;
      request.seed = derive_seed(seed, 2, i, static_cast<std::uint64_t>(run));
      std::vector<std::string> completions = judge.complete(request);
      const std::string& response = completions.front();
      std::optional<std::string> answer = extract_boxed(response);
      if (!answer) {
        ++unparsed;
        verdict.judge_answers.push_back(response);
        continue;
      }
      verdict.judge_answers.push_back(*answer);
      if (equivalent(*answer, problem.gold_answer)) ++matches;
    }
    verdict.kept = 2 * matches > runs;
    if (unparsed > 0)
      verdict.note = std::to_string(unparsed) + " unparseable judge answer(s) counted as misses";
    verdicts.push_back(std::move(verdict));
  }
  return verdicts;
}

std::vector<FilterVerdict> binary_filter(const Dataset& dataset, RolloutProvider& judge,
                                         std::uint64_t seed) {
  std::vector<FilterVerdict> verdicts;
  std::vector<const Problem*> scope = filter_scope(dataset);
  for (std::size_t i = 0; i < scope.size(); ++i) {
    const Problem& problem = *scope[i];
    FilterVerdict verdict;
    verdict.problem_id = problem.id;
    verdict.filter = "binary";

    RolloutRequest request;
    request.problem_id = problem.id;
    request.level = DifficultyLevel::OpenEnded;
    request.prompt = answerability_prompt(problem);
    request.n = 1;
    request.seed = derive_seed(seed, 3, i);
    std::vector<std::string> completions = judge.complete(request);
    std::vector<std::string> tokens = tokens_upper(completions.front());

    // UNANSWERABLE contains ANSWERABLE as a substring; only whole tokens count.
    const bool no = std::count(tokens.begin(), tokens.end(), "UNANSWERABLE") > 0;
    const bool yes = std::count(tokens.begin(), tokens.end(), "ANSWERABLE") > 0;
    if (no) {
      verdict.kept = false;
    } else if (yes) {
      verdict.kept = true;
    } else {
      verdict.kept = false;
      verdict.note = "unparseable verdict";
    }
    verdicts.push_back(std::move(verdict));
  }
  return verdicts;
}

std::size_t apply_filter(Dataset& dataset, const std::vector<FilterVerdict>& verdicts) {
  std::set<std::string> dropped;
  for (const FilterVerdict& verdict : verdicts)
    if (!verdict.kept) dropped.insert(verdict.problem_id);
  if (dropped.empty()) return 0;

  std::vector<Problem> kept;
  kept.reserve(dataset.problems.size());
  for (Problem& problem : dataset.problems) {
    if (dropped.count(problem.id)) {
      dataset.variants.erase(problem.id);
      dataset.hard_flag.erase(problem.id);
    } else {
      kept.push_back(std::move(problem));
    }
  }
  const std::size_t removed = dataset.problems.size() - kept.size();
  dataset.problems = std::move(kept);
  return removed;
}

}  // namespace scaffold

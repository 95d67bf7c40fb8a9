#include "scaffold/dataset.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>

#include "scaffold/answer.hpp"

namespace scaffold {

using json = nlohmann::json;

DifficultyLevel level_from_value(int value) {
  if (value < 1 || value > 4) {
    throw std::invalid_argument("difficulty level must be in 1..4, got " +
                                std::to_string(value));
  }
  return static_cast<DifficultyLevel>(value);
}

std::string_view level_name(DifficultyLevel level) {
  switch (level) {
    case DifficultyLevel::Mcq4: return "mcq4";
    case DifficultyLevel::Mcq10: return "mcq10";
    case DifficultyLevel::Cloze: return "cloze";
    case DifficultyLevel::OpenEnded: return "oeq";
  }
  return "?";
}

const Problem* Dataset::find(std::string_view id) const {
  for (const Problem& p : problems) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

const Variant* Dataset::variant(const std::string& id, DifficultyLevel level) const {
  auto it = variants.find(id);
  if (it == variants.end()) return nullptr;
  const auto& slot = it->second[level_index(level)];
  return slot ? &*slot : nullptr;
}

bool Dataset::is_hard(const std::string& id) const {
  auto it = hard_flag.find(id);
  return it != hard_flag.end() && it->second;
}

std::vector<const Problem*> Dataset::hard_problems() const {
  std::vector<const Problem*> out;
  for (const Problem& p : problems) {
    if (is_hard(p.id)) out.push_back(&p);
  }
  return out;
}

bool Dataset::ready_for_training(const std::string& id) const {
  for (DifficultyLevel level : all_levels()) {
    const Variant* v = variant(id, level);
    if (v == nullptr || !v->validation.valid) return false;
  }
  return true;
}

namespace {

[[noreturn]] void line_error(const std::filesystem::path& path, int line,
                             const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string require_string(const json& j, const char* field,
                           const std::filesystem::path& path, int line) {
  if (!j.contains(field)) line_error(path, line, std::string("missing field \"") + field + "\"");
  if (!j.at(field).is_string()) {
    line_error(path, line, std::string("field \"") + field + "\" must be a string");
  }
  return j.at(field).get<std::string>();
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file " + path.string());

  Dataset dataset;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(path, lineno, std::string("malformed JSON: ") + e.what());
    }
    Problem p;
    p.id = require_string(j, "id", path, lineno);
    p.question = require_string(j, "question", path, lineno);
    p.gold_answer = require_string(j, "gold_answer", path, lineno);
    if (p.gold_answer.empty()) line_error(path, lineno, "gold_answer must be non-empty");
    if (j.contains("source")) p.source = j.at("source").get<std::string>();
    if (j.contains("pass_rate_prior") && !j.at("pass_rate_prior").is_null()) {
      double r = j.at("pass_rate_prior").get<double>();
      if (r < 0.0 || r > 1.0) line_error(path, lineno, "pass_rate_prior outside [0,1]");
      p.pass_rate_prior = r;
    }
    if (!seen.insert(p.id).second) {
      line_error(path, lineno, "duplicate problem id \"" + p.id + "\"");
    }
    dataset.problems.push_back(std::move(p));
  }
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file " + path.string());
  for (const Problem& p : dataset.problems) {
    json j;
    j["id"] = p.id;
    j["question"] = p.question;
    j["gold_answer"] = p.gold_answer;
    if (!p.source.empty()) j["source"] = p.source;
    if (p.pass_rate_prior) j["pass_rate_prior"] = *p.pass_rate_prior;
    out << j.dump() << "\n";
  }
}

void attach_variant(Dataset& dataset, Variant variant) {
  if (!variant.validation.valid) {
    throw std::runtime_error("variant for \"" + variant.problem_id +
                             "\" rejected: " + variant.validation.reason);
  }
  if (dataset.find(variant.problem_id) == nullptr) {
    throw std::runtime_error("variant references unknown problem id \"" +
                             variant.problem_id + "\"");
  }
  auto& slots = dataset.variants[variant.problem_id];
  slots[level_index(variant.level)] = std::move(variant);
}

std::vector<Variant> load_variants(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open variant file " + path.string());

  std::vector<Variant> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(path, lineno, std::string("malformed JSON: ") + e.what());
    }
    Variant v;
    v.problem_id = require_string(j, "problem_id", path, lineno);
    if (!j.contains("level") || !j.at("level").is_number_integer()) {
      line_error(path, lineno, "missing or non-integer field \"level\"");
    }
    v.level = level_from_value(j.at("level").get<int>());
    v.prompt = require_string(j, "prompt", path, lineno);
    if (j.contains("options")) v.options = j.at("options").get<std::vector<std::string>>();
    if (j.contains("mask")) v.mask = j.at("mask").get<std::string>();

    const bool mcq = v.level == DifficultyLevel::Mcq4 || v.level == DifficultyLevel::Mcq10;
    if (mcq != !v.options.empty()) {
      line_error(path, lineno, "options must be present exactly for MCQ levels");
    }
    if ((v.level == DifficultyLevel::Cloze) != !v.mask.empty()) {
      line_error(path, lineno, "mask must be present exactly for the cloze level");
    }
    v.validation = Validation::fail("unvalidated");
    out.push_back(std::move(v));
  }
  return out;
}

void save_variants(std::span<const Variant> variants, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write variant file " + path.string());
  for (const Variant& v : variants) {
    json j;
    j["problem_id"] = v.problem_id;
    j["level"] = level_value(v.level);
    j["prompt"] = v.prompt;
    if (!v.options.empty()) j["options"] = v.options;
    if (!v.mask.empty()) j["mask"] = v.mask;
    out << j.dump() << "\n";
  }
}

void load_hard_set(Dataset& dataset, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hard-set file " + path.string());
  json j = json::parse(in);
  dataset.hard_flag.clear();
  for (const auto& id : j.at("hard_ids")) {
    std::string s = id.get<std::string>();
    if (dataset.find(s) == nullptr) {
      throw std::runtime_error("hard-set file names unknown problem id \"" + s + "\"");
    }
    dataset.hard_flag[s] = true;
  }
}

void save_hard_set(const Dataset& dataset, const std::filesystem::path& path) {
  json ids = json::array();
  for (const Problem& p : dataset.problems) {
    if (dataset.is_hard(p.id)) ids.push_back(p.id);
  }
  json j;
  j["hard_ids"] = ids;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write hard-set file " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace scaffold

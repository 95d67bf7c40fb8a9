#include "scaffold/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "scaffold/eval.hpp"

namespace scaffold {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

using Setter = std::function<void(Settings&, const std::string&)>;

double parse_double(const std::string& v) {
  std::size_t used = 0;
  double out = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("not a number: " + v);
  return out;
}

int parse_int(const std::string& v) {
  std::size_t used = 0;
  int out = std::stoi(v, &used);
  if (used != v.size()) throw std::invalid_argument("not an integer: " + v);
  return out;
}

std::uint64_t parse_u64(const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = std::stoull(v, &used);
  if (used != v.size()) throw std::invalid_argument("not an integer: " + v);
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"lr", [](Settings& s, const std::string& v) { s.lr = parse_double(v); }},
      {"kl_coef", [](Settings& s, const std::string& v) { s.kl_coef = parse_double(v); }},
      {"clip_ratio_low",
       [](Settings& s, const std::string& v) { s.clip_ratio_low = parse_double(v); }},
      {"clip_ratio_high",
       [](Settings& s, const std::string& v) { s.clip_ratio_high = parse_double(v); }},
      {"max_prompt_length",
       [](Settings& s, const std::string& v) { s.max_prompt_length = parse_int(v); }},
      {"max_response_length",
       [](Settings& s, const std::string& v) { s.max_response_length = parse_int(v); }},
      {"num_train_samples",
       [](Settings& s, const std::string& v) { s.num_train_samples = parse_int(v); }},
      {"rollout_temperature",
       [](Settings& s, const std::string& v) { s.rollout_temperature = parse_double(v); }},
      {"inference_temperature",
       [](Settings& s, const std::string& v) { s.inference_temperature = parse_double(v); }},
      {"rollout_n", [](Settings& s, const std::string& v) { s.rollout_n = parse_int(v); }},
      {"train_batch_size",
       [](Settings& s, const std::string& v) { s.train_batch_size = parse_int(v); }},
      {"seed", [](Settings& s, const std::string& v) { s.seed = parse_u64(v); }},
      {"checkpoint_every",
       [](Settings& s, const std::string& v) { s.checkpoint_every = parse_int(v); }},
      {"tau", [](Settings& s, const std::string& v) { s.tau = parse_double(v); }},
      {"curriculum_m", [](Settings& s, const std::string& v) { s.curriculum_m = parse_int(v); }},
      {"graduation", [](Settings& s, const std::string& v) { s.graduation = v; }},
      {"downweight_factor",
       [](Settings& s, const std::string& v) { s.downweight_factor = parse_double(v); }},
      {"static_mixture",
       [](Settings& s, const std::string& v) { s.static_mixture = parse_bool(v); }},
      {"sim_learning_rate",
       [](Settings& s, const std::string& v) { s.sim_learning_rate = parse_double(v); }},
      {"sim_transfer", [](Settings& s, const std::string& v) { s.sim_transfer = parse_bool(v); }},
      {"cloze_pool_size",
       [](Settings& s, const std::string& v) { s.cloze_pool_size = parse_int(v); }},
      {"open_ended_pool_size",
       [](Settings& s, const std::string& v) { s.open_ended_pool_size = parse_int(v); }},
      {"provider", [](Settings& s, const std::string& v) { s.provider = v; }},
      {"provider_fixture", [](Settings& s, const std::string& v) { s.provider_fixture = v; }},
      {"judge", [](Settings& s, const std::string& v) { s.judge = v; }},
      {"judge_fixture", [](Settings& s, const std::string& v) { s.judge_fixture = v; }},
      {"endpoint_url", [](Settings& s, const std::string& v) { s.endpoint_url = v; }},
      {"model", [](Settings& s, const std::string& v) { s.model = v; }},
      {"judge_model", [](Settings& s, const std::string& v) { s.judge_model = v; }},
      {"hardset_n", [](Settings& s, const std::string& v) { s.hardset_n = parse_int(v); }},
      {"silver_runs", [](Settings& s, const std::string& v) { s.silver_runs = parse_int(v); }},
      {"problems_file", [](Settings& s, const std::string& v) { s.problems_file = v; }},
      {"variants_file", [](Settings& s, const std::string& v) { s.variants_file = v; }},
      {"hard_set_file", [](Settings& s, const std::string& v) { s.hard_set_file = v; }},
  };
  return table;
}

}  // namespace

Settings parse_settings_text(const std::string& text, const std::string& origin) {
  Settings settings;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected \"key = value\"");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end())
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": unknown key \"" + key +
                               "\"");
    try {
      it->second(settings, value);
    } catch (const std::exception& e) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": key \"" + key +
                               "\": " + e.what());
    }
  }
  return settings;
}

Settings load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_settings_text(text.str(), path);
}

std::string render_settings(const Settings& s) {
  std::ostringstream out;
  auto emit = [&out](const std::string& key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  emit("checkpoint_every", std::to_string(s.checkpoint_every));
  emit("clip_ratio_high", format_metric(s.clip_ratio_high));
  emit("clip_ratio_low", format_metric(s.clip_ratio_low));
  emit("cloze_pool_size", std::to_string(s.cloze_pool_size));
  emit("curriculum_m", std::to_string(s.curriculum_m));
  emit("downweight_factor", format_metric(s.downweight_factor));
  emit("endpoint_url", s.endpoint_url);
  emit("graduation", s.graduation);
  emit("hard_set_file", s.hard_set_file);
  emit("hardset_n", std::to_string(s.hardset_n));
  emit("inference_temperature", format_metric(s.inference_temperature));
  emit("judge", s.judge);
  emit("judge_fixture", s.judge_fixture);
  emit("judge_model", s.judge_model);
  emit("kl_coef", format_metric(s.kl_coef));
  emit("lr", format_metric(s.lr));
  emit("max_prompt_length", std::to_string(s.max_prompt_length));
  emit("max_response_length", std::to_string(s.max_response_length));
  emit("model", s.model);
  emit("num_train_samples", std::to_string(s.num_train_samples));
  emit("open_ended_pool_size", std::to_string(s.open_ended_pool_size));
  emit("problems_file", s.problems_file);
  emit("provider", s.provider);
  emit("provider_fixture", s.provider_fixture);
  emit("rollout_n", std::to_string(s.rollout_n));
  emit("rollout_temperature", format_metric(s.rollout_temperature));
  emit("seed", std::to_string(s.seed));
  emit("silver_runs", std::to_string(s.silver_runs));
  emit("sim_learning_rate", format_metric(s.sim_learning_rate));
  emit("sim_transfer", s.sim_transfer ? "true" : "false");
  emit("static_mixture", s.static_mixture ? "true" : "false");
  emit("tau", format_metric(s.tau));
  emit("train_batch_size", std::to_string(s.train_batch_size));
  emit("variants_file", s.variants_file);
  return out.str();
}

}  // namespace scaffold

#include "scaffold/provider.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "scaffold/rundir.hpp"

namespace scaffold {

using nlohmann::json;

namespace {

class SimulatedProvider final : public RolloutProvider {
 public:
  explicit SimulatedProvider(SimPolicy policy) : policy_(std::move(policy)) {}

  std::vector<std::string> complete(const RolloutRequest& request) override {
    RolloutGroup group =
        sample_rollouts(policy_, request.problem_id, request.level, request.n, request.seed);
    return group.completions;
  }

  std::string kind() const override { return "simulated"; }

 private:
  SimPolicy policy_;
};

class ScriptedProvider final : public RolloutProvider {
 public:
  explicit ScriptedProvider(const std::string& fixture_path) : path_(fixture_path) {
    std::ifstream in(fixture_path);
    if (!in) throw std::runtime_error("cannot read rollout fixture: " + fixture_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw std::runtime_error(fixture_path + ":" + std::to_string(line_no) + ": " + e.what());
      }
      Key key{j.at("problem_id").get<std::string>(),
              level_from_value(j.at("level").get<int>())};
      batches_[key].push_back(j.at("completions").get<std::vector<std::string>>());
    }
  }

  std::vector<std::string> complete(const RolloutRequest& request) override {
    Key key{request.problem_id, request.level};
    auto it = batches_.find(key);
    if (it == batches_.end())
      throw std::runtime_error("rollout fixture " + path_ + " has no completions for \"" +
                               request.problem_id + "\" at level " +
                               std::to_string(level_value(request.level)));
    std::vector<std::string> out;
    out.reserve(request.n);
    while (static_cast<int>(out.size()) < request.n) {
      const std::vector<std::string>& batch = it->second[next_[key] % it->second.size()];
      ++next_[key];
      for (const std::string& completion : batch) {
        if (static_cast<int>(out.size()) >= request.n) break;
        out.push_back(completion);
      }
    }
    return out;
  }

  std::string kind() const override { return "scripted"; }

 private:
  using Key = std::pair<std::string, DifficultyLevel>;
  std::string path_;
  std::map<Key, std::vector<std::vector<std::string>>> batches_;
  std::map<Key, std::size_t> next_;
};

class RemoteProvider final : public RolloutProvider {
 public:
  explicit RemoteProvider(RemoteOptions options) : options_(std::move(options)) {
    if (options_.endpoint_url.empty())
      throw std::runtime_error("remote provider requires an endpoint URL");
    if (options_.model.empty()) throw std::runtime_error("remote provider requires a model name");
  }

  std::vector<std::string> complete(const RolloutRequest& request) override {
    const json body{{"model", options_.model},
                    {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                    {"temperature", options_.temperature},
                    {"n", request.n},
                    {"max_tokens", options_.max_tokens}};
    const std::string payload = body.dump();

    int last_status = 0;
    std::string last_error;
    for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
      if (attempt > 1) {
        const int backoff = options_.initial_backoff_ms << (attempt - 2);
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      }
      httplib::Client client(options_.endpoint_url);
      client.set_connection_timeout(options_.timeout_seconds, 0);
      client.set_read_timeout(options_.timeout_seconds, 0);
      client.set_write_timeout(options_.timeout_seconds, 0);
      httplib::Headers headers;
      if (!options_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + options_.api_key);

      auto result = client.Post("/chat/completions", headers, payload, "application/json");
      if (!result) {
        last_status = 0;
        last_error = httplib::to_string(result.error());
        log(request, attempt, 0, last_error, {});
        continue;
      }
      last_status = result->status;
      if (result->status < 200 || result->status >= 300) {
        last_error = "HTTP " + std::to_string(result->status);
        log(request, attempt, result->status, result->body, {});
        continue;
      }
      std::vector<std::string> completions;
      try {
        json response = json::parse(result->body);
        for (const json& choice : response.at("choices"))
          completions.push_back(choice.at("message").at("content").get<std::string>());
      } catch (const std::exception& e) {
        last_error = std::string("malformed response: ") + e.what();
        log(request, attempt, result->status, last_error, {});
        continue;
      }
      if (completions.empty()) {
        last_error = "response carried no choices";
        log(request, attempt, result->status, last_error, {});
        continue;
      }
      log(request, attempt, result->status, "", completions);
      return completions;
    }
    throw std::runtime_error("remote rollout failed after " + std::to_string(options_.attempts) +
                             " attempts (last: " +
                             (last_error.empty() ? "HTTP " + std::to_string(last_status)
                                                 : last_error) +
                             ")");
  }

  std::string kind() const override { return "remote"; }

 private:
  void log(const RolloutRequest& request, int attempt, int status, const std::string& error,
           const std::vector<std::string>& completions) const {
    if (options_.log_path.empty()) return;
    json entry{{"endpoint", options_.endpoint_url},
               {"model", options_.model},
               {"problem_id", request.problem_id},
               {"level", level_value(request.level)},
               {"n", request.n},
               {"attempt", attempt},
               {"status", status},
               {"prompt", request.prompt}};
    if (error.empty())
      entry["completions"] = completions;
    else
      entry["error"] = error;
    append_line(options_.log_path, entry.dump());
  }

  RemoteOptions options_;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value && *value ? value : fallback;
}

}  // namespace

std::unique_ptr<RolloutProvider> make_simulated_provider(SimPolicy policy) {
  return std::make_unique<SimulatedProvider>(std::move(policy));
}

std::unique_ptr<RolloutProvider> make_scripted_provider(const std::string& fixture_path) {
  return std::make_unique<ScriptedProvider>(fixture_path);
}

std::unique_ptr<RolloutProvider> make_remote_provider(const RemoteOptions& options) {
  return std::make_unique<RemoteProvider>(options);
}

std::unique_ptr<RolloutProvider> make_provider_from_settings(const Settings& settings,
                                                             bool judge_role,
                                                             const std::string& base_dir,
                                                             const Dataset* dataset,
                                                             const std::string& log_path) {
  const std::string kind = judge_role ? settings.judge : settings.provider;
  auto resolve = [&base_dir](const std::string& path) {
    std::filesystem::path p(path);
    return (p.is_absolute() || base_dir.empty()) ? p.string()
                                                 : (std::filesystem::path(base_dir) / p).string();
  };

  if (kind == "simulated") {
    if (!dataset)
      throw std::runtime_error("simulated provider needs a dataset to build candidate pools");
    SimPolicyConfig config;
    config.transfer = settings.sim_transfer;
    config.learning_rate = settings.sim_learning_rate;
    config.cloze_pool_size = settings.cloze_pool_size;
    config.open_ended_pool_size = settings.open_ended_pool_size;
    config.rng_seed = settings.seed;
    return make_simulated_provider(build_sim_policy(*dataset, config));
  }
  if (kind == "scripted") {
    const std::string fixture = judge_role ? settings.judge_fixture : settings.provider_fixture;
    if (fixture.empty())
      throw std::runtime_error(std::string(judge_role ? "judge" : "provider") +
                               " is scripted but no fixture path is configured");
    return make_scripted_provider(resolve(fixture));
  }
  if (kind == "remote") {
    RemoteOptions options;
    options.endpoint_url = env_or("ENDPOINT_URL", settings.endpoint_url);
    options.api_key = env_or("API_KEY", "");
    options.model = judge_role ? settings.judge_model : settings.model;
    options.temperature =
        judge_role ? settings.inference_temperature : settings.rollout_temperature;
    options.max_tokens = settings.max_response_length;
    options.log_path = log_path;
    return make_remote_provider(options);
  }
  throw std::runtime_error("unknown provider kind \"" + kind + "\"");
}

}  // namespace scaffold

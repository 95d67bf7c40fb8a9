#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scaffold/config.hpp"
#include "scaffold/dataset.hpp"
#include "scaffold/grpo.hpp"

namespace scaffold {

struct RolloutRequest {
  std::string problem_id;
  DifficultyLevel level = DifficultyLevel::OpenEnded;
  std::string prompt;
  int n = 1;
  std::uint64_t seed = 0;  // consumed by the simulated provider only
};

// Source of completions. The simulated provider samples the categorical
// learner, the scripted provider replays recorded fixtures, and the remote
// provider speaks the chat-completion wire protocol. Scripted and simulated
// providers make the pipeline a pure function of (dataset, fixtures, seeds).
class RolloutProvider {
 public:
  virtual ~RolloutProvider() = default;
  virtual std::vector<std::string> complete(const RolloutRequest& request) = 0;
  virtual std::string kind() const = 0;
};

std::unique_ptr<RolloutProvider> make_simulated_provider(SimPolicy policy);

// Fixture: JSON Lines of {"problem_id": string, "level": 1|2|3|4,
// "completions": [string, ...]}. Requests consume recorded batches for
// their (problem_id, level) in file order, cycling batches and entries as
// needed to honor request.n.
std::unique_ptr<RolloutProvider> make_scripted_provider(const std::string& fixture_path);

struct RemoteOptions {
  std::string endpoint_url;
  std::string api_key;
  std::string model;
  double temperature = 1.0;
  int max_tokens = 8192;
  int attempts = 3;
  int initial_backoff_ms = 1000;  // doubles per retry
  int timeout_seconds = 30;
  std::string log_path;  // request/response JSONL; empty disables logging
};

std::unique_ptr<RolloutProvider> make_remote_provider(const RemoteOptions& options);

// Builds the rollout or judge provider named by the settings. ENDPOINT_URL
// and API_KEY env vars override the configured endpoint and key. Fixture
// paths resolve against base_dir when relative. The dataset is needed only
// for the simulated kind, whose pools derive from it.
std::unique_ptr<RolloutProvider> make_provider_from_settings(const Settings& settings,
                                                             bool judge_role,
                                                             const std::string& base_dir,
                                                             const Dataset* dataset,
                                                             const std::string& log_path = "");

}  // namespace scaffold

#pragma once

#include <cstdint>
#include <string>

namespace scaffold {

struct GlobalOptions {
  std::string config_path;  // empty: built-in defaults
  std::string run_dir = "run";
};

// CLI entry points. Each returns a process exit code and reports progress on
// stdout; errors surface as exceptions for main() to render uniformly.

int cmd_ingest(const GlobalOptions& global, const std::string& input_path);

// Deterministic builders where possible; emits data/prompts_needed.jsonl for
// problems that need the LLM path and data/mask_review.jsonl for golds whose
// mask semantics need a human look. With responses_path set, parses LLM
// reformulation responses instead and attaches the valid ones.
int cmd_reformulate(const GlobalOptions& global, const std::string& responses_path);

int cmd_filter(const GlobalOptions& global, const std::string& mode);

// n <= 0 falls back to the configured hardset_n.
int cmd_hardset(const GlobalOptions& global, int n);

// steps is the total target step count; resuming continues the latest
// checkpoint until next_step reaches it.
int cmd_train(const GlobalOptions& global, const std::string& mode, std::int64_t steps,
              std::uint64_t seed, bool seed_given, bool resume);

int cmd_eval(const GlobalOptions& global, const std::string& ks_spec);

int cmd_report(const GlobalOptions& global);

}  // namespace scaffold

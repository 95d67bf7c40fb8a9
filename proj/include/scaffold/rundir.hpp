#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace scaffold {

// Layout of one run directory:
//   config.snapshot              effective settings, written once per run
//   metrics.csv                  append-only, one row per training step
//   checkpoints/step-<N>/        curriculum.json + policy.json
//   logs/requests.jsonl          remote provider request/response log
//   data/                        problems, variants, hard set, verdicts
//   reports/                     CSV summaries and SVG charts
class RunDir {
 public:
  explicit RunDir(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path config_snapshot() const { return root_ / "config.snapshot"; }
  std::filesystem::path metrics_csv() const { return root_ / "metrics.csv"; }
  std::filesystem::path checkpoints_dir() const { return root_ / "checkpoints"; }
  std::filesystem::path checkpoint_dir(std::int64_t step) const {
    return checkpoints_dir() / ("step-" + std::to_string(step));
  }
  std::filesystem::path requests_log() const { return root_ / "logs" / "requests.jsonl"; }
  std::filesystem::path data_dir() const { return root_ / "data"; }
  std::filesystem::path reports_dir() const { return root_ / "reports"; }

  // Relative paths resolve against the run root; absolute paths pass through.
  std::filesystem::path resolve(const std::string& path) const;

  void ensure_layout() const;
  void write_config_snapshot(const std::string& text) const;

  // Writer fills a staging directory; the checkpoint becomes visible only
  // through the final rename, so readers never observe a partial one.
  void publish_checkpoint(std::int64_t step,
                          const std::function<void(const std::filesystem::path&)>& writer) const;

  std::vector<std::int64_t> checkpoint_steps() const;  // ascending

  // Appends one row, writing the header first when the file is new.
  void append_metrics(const std::string& header, const std::string& row) const;

 private:
  std::filesystem::path root_;
};

void append_line(const std::filesystem::path& path, const std::string& line);

}  // namespace scaffold

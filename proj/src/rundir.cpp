#include "scaffold/rundir.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace scaffold {

namespace fs = std::filesystem;

fs::path RunDir::resolve(const std::string& path) const {
  fs::path p(path);
  return p.is_absolute() ? p : root_ / p;
}

void RunDir::ensure_layout() const {
  fs::create_directories(root_);
  fs::create_directories(checkpoints_dir());
  fs::create_directories(root_ / "logs");
  fs::create_directories(data_dir());
  fs::create_directories(reports_dir());
}

void RunDir::write_config_snapshot(const std::string& text) const {
  std::ofstream out(config_snapshot());
  if (!out) throw std::runtime_error("cannot write " + config_snapshot().string());
  out << text;
}

void RunDir::publish_checkpoint(
    std::int64_t step, const std::function<void(const fs::path&)>& writer) const {
  const fs::path final_dir = checkpoint_dir(step);
  const fs::path staging = checkpoints_dir() / ("step-" + std::to_string(step) + ".tmp");
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging);
  writer(staging);
  fs::remove_all(final_dir, ec);
  fs::rename(staging, final_dir);
}

std::vector<std::int64_t> RunDir::checkpoint_steps() const {
  std::vector<std::int64_t> steps;
  if (!fs::is_directory(checkpoints_dir())) return steps;
  for (const auto& entry : fs::directory_iterator(checkpoints_dir())) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("step-", 0) != 0) continue;
    const std::string digits = name.substr(5);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) continue;
    steps.push_back(std::stoll(digits));
  }
  std::sort(steps.begin(), steps.end());
  return steps;
}

void RunDir::append_metrics(const std::string& header, const std::string& row) const {
  const bool fresh = !fs::exists(metrics_csv()) || fs::file_size(metrics_csv()) == 0;
  std::ofstream out(metrics_csv(), std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + metrics_csv().string());
  if (fresh) out << header << "\n";
  out << row << "\n";
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path.string());
  out << line << "\n";
}

}  // namespace scaffold

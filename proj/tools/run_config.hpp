#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "harp/fitting.hpp"
#include "harp/problems.hpp"
#include "harp/transform.hpp"

namespace harp::cli {

/// Rejected configuration text; line is 0 for command-line overrides.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& msg);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Everything a run needs, loaded from `key = value` lines. See
/// RunConfig::describe() for the key list and defaults.
struct RunConfig {
  // problem source: tensor files when both paths are set, else synthetic
  std::string w_path;
  std::string h_path;
  SyntheticSpec synthetic;
  std::uint64_t seed = 1;      // synthetic problem i uses seed + i
  std::size_t problems = 1;
  std::string name = "layer";

  ProcessorOptions processor;
  FitConfig fit;

  std::string out_dir = ".";

  RunConfig();

  /// Applies one key; throws ConfigError(line) on unknown keys or bad values.
  void set(const std::string& key, const std::string& value, std::size_t line = 0);
  /// Cross-field checks (fit settings, problem spec).
  void validate() const;

  bool from_files() const { return !w_path.empty() || !h_path.empty(); }
  SyntheticSpec synthetic_for(std::size_t index) const;
  std::string layer_name(std::size_t index) const;

  /// Current values in config syntax, one key per line.
  std::string to_text() const;
  static std::vector<std::string> keys();
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace harp::cli

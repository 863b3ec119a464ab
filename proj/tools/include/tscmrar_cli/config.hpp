#pragma once

// Run configuration shared by every subcommand. Values come from, in order of
// precedence: command-line flags, a key=value config file, built-in defaults.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tscmrar/training.hpp"

namespace tscmrar::cli {

// Bad flags, unknown config keys, unparsable values. Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path data;
  std::filesystem::path out;
  std::filesystem::path checkpoint;
  std::uint64_t seed = 1;
  std::size_t k = 8;
  std::size_t alpha = 128;
  double beta = 0.0004;
  double gamma = 0.0002;
  std::size_t epochs = 25;
  std::string method = "tsc";  // tsc | knn | dt
  std::size_t cv = 0;          // folds; 0 = plain train/test split
  double split = 0.7;
  std::string on_value = "ON";
  bool skip_unknown = false;
  std::size_t neighbors = 5;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;
  std::size_t jobs = 1;
  std::size_t probes = 100;
  std::size_t sweep_epochs = 15;
  std::vector<std::size_t> sweep_alpha{64, 128, 256};
  std::vector<double> sweep_beta{0.0001, 0.0003, 0.0005, 0.0007, 0.0009};
  std::vector<double> sweep_gamma{0.0001, 0.0003, 0.0005, 0.0007, 0.0009};
  std::size_t synth_files = 26;
  std::size_t synth_events = 400;
  std::filesystem::path history;
  std::string event;

  TrainConfig train_config() const;
  SweepGrid sweep_grid() const;
};

// Every accepted key, in echo order.
const std::vector<std::string_view>& config_keys();

// Throws UsageError on an unknown key or a value that does not parse.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// "key = value" lines; blank lines and '#' comments ignored. Throws UsageError
// with file:line on unknown or repeated keys.
void load_config_file(RunConfig& config, const std::filesystem::path& path);

// Makes data/out/checkpoint/history absolute and checks value ranges.
void resolve(RunConfig& config);

// One "key=value" line per key; load_config_file reads it back unchanged.
std::string format_config(const RunConfig& config);

}  // namespace tscmrar::cli

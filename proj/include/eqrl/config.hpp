#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqrl/trainer.hpp"

namespace eqrl {

// Everything a CLI invocation needs. Defaults are the desk-scale protocol:
// 3 seeds x 100k steps, evaluation every 5k steps over 10 episodes.
struct RunConfig {
  Algorithm algo = Algorithm::td3;
  AgentMode mode = AgentMode::equivariant;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::int64_t total_steps = 100'000;
  std::int64_t eval_interval = 5'000;
  int eval_episodes = 10;
  std::int64_t checkpoint_interval = 0;  // 0: final and best snapshots only
  double threshold_fraction = 0.8;       // steps-to-threshold criterion
  int jobs = 1;                          // seeds trained concurrently
  EnvConfig env;
  QuadrotorParams params;
  Td3Config td3;
  SacConfig sac;
  std::string out_dir = "runs";

  /// Throws ConfigError naming the offending field.
  void validate() const;
  TrainConfig train_config(std::uint64_t seed) const;
};

/// Parses a line-oriented "key = value" file. '#' starts a comment; blank
/// lines are ignored; vectors are comma-separated. Missing keys keep their
/// defaults; unknown keys, malformed lines and bad values are errors that
/// name the line. The result is validated.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Applies one key/value pair (the same keys the file accepts).
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Documented keys, in the order they are listed in the README.
const std::vector<std::string>& config_keys();

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace eqrl

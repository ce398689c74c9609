#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "eqrl/agents.hpp"
#include "eqrl/environment.hpp"

namespace eqrl {

using PolicyFn = std::function<ActorOutput(const State&)>;

struct EvalResult {
  int episodes = 0;
  double mean_return = 0.0;
  double std_return = 0.0;           // population std over episodes
  double mean_terminal_error = 0.0;  // mean |x_T - x_d|, m
  int position_bound_terminations = 0;
  std::vector<double> returns;
  std::vector<Vec3> terminal_errors;  // x_T - x_d per episode
};

/// Runs n_episodes noise-free episodes from initial states drawn with `seed`
/// and reports undiscounted return statistics.
EvalResult evaluate(const PolicyFn& policy, const EnvConfig& env, const QuadrotorParams& params,
                    int n_episodes, std::uint64_t seed);

/// Greedy policy of an actor network under the given input encoding.
PolicyFn actor_policy(Mlp actor, AgentMode mode, const EnvConfig& env);

/// Commands the hover thrusts m g / 4 on every rotor, via inverse_mixer.
PolicyFn hover_policy(const QuadrotorParams& params);

/// A TD3-shaped actor whose output is the hover command for every input.
Mlp make_hover_actor(AgentMode mode, const QuadrotorParams& params, int hidden = 256);

/// Input encoding implied by a snapshot's input width. Throws
/// std::invalid_argument for actors that fit neither encoding.
AgentMode snapshot_mode(const Mlp& actor);

struct TrainConfig {
  Algorithm algo = Algorithm::td3;
  AgentMode mode = AgentMode::equivariant;
  std::int64_t total_steps = 100'000;
  std::int64_t eval_interval = 5'000;
  int eval_episodes = 10;
  std::uint64_t seed = 0;
  EnvConfig env;
  QuadrotorParams params;
  Td3Config td3;
  SacConfig sac;

  void validate() const;
};

struct EvalRow {
  std::int64_t env_step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_terminal_error = 0.0;
  double wall_time_s = 0.0;
};

struct TrainingLog {
  Algorithm algo = Algorithm::td3;
  AgentMode mode = AgentMode::equivariant;
  std::uint64_t seed = 0;
  std::vector<EvalRow> rows;
};

struct TrainResult {
  TrainingLog log;
  Mlp final_actor;
  Mlp best_actor;  // actor with the highest evaluation return seen
  double best_eval_return = 0.0;
  std::int64_t episodes = 0;
};

using CheckpointFn = std::function<void(std::int64_t env_step, const Mlp& actor)>;

/// Independent random streams derived from one experiment seed.
enum class Stream : std::uint64_t { environment = 1, agent = 2, warmup = 3, evaluation = 4, final_check = 5 };
std::uint64_t derive_seed(std::uint64_t seed, Stream stream);

/// Interacts with one environment for total_steps, storing encoded
/// transitions, doing one gradient update per step after warm-up, and
/// evaluating every eval_interval steps. Deterministic given the config.
/// If checkpoint_interval > 0, on_checkpoint sees the actor at those steps.
TrainResult train(const TrainConfig& cfg, std::int64_t checkpoint_interval = 0,
                  const CheckpointFn& on_checkpoint = {});

}  // namespace eqrl

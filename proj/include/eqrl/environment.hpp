#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "eqrl/dynamics.hpp"

namespace eqrl {

struct EnvConfig {
  Vec3 x_d = Vec3::Zero();   // target position, m
  double e_x_max = 3.0;      // per-axis termination half-width, m
  double c_x = 2.0;
  double c_v = 0.15;
  double c_omega = 0.2;
  double c_a = 0.03;
  double reward_scale = 0.1;
  double dt = 0.01;          // s
  int max_steps = 500;

  // Reset distribution.
  double init_pos_half_width = 1.5;  // m, around x_d
  double init_vel = 0.5;             // m/s, per axis
  double init_tilt = 0.2;            // rad, roll and pitch
  double init_omega = 0.2;           // rad/s, per axis

  // Safety termination.
  double v_max = 8.0;       // m/s
  double omega_max = 25.0;  // rad/s

  std::uint64_t seed = 0;

  void validate() const;
};

// Tanh-bounded network output in [-1, 1]^4, before mapping to thrusts.
struct ActorOutput {
  Eigen::Vector4d u = Eigen::Vector4d::Zero();
};

enum class DoneReason { none, position_bound, velocity_bound, omega_bound, horizon };

std::string_view to_string(DoneReason r);

struct StepResult {
  State next_state;
  Action action;       // thrusts actually applied
  double reward = 0.0;
  bool done = false;
  DoneReason done_reason = DoneReason::none;

  /// True when the episode ended by leaving the safe set rather than by the
  /// horizon; only these transitions cut off bootstrapping.
  bool terminal() const { return done && done_reason != DoneReason::horizon; }
};

struct ResetResult {
  State state;
  Action prev_action;  // hover thrusts until the first command arrives
};

/// Tᵢ = (uᵢ + 1)/2 · T_max, with u clamped to [-1, 1] first.
Action thrusts_from_actor(const ActorOutput& out, const QuadrotorParams& p);
/// Inverse of thrusts_from_actor on [0, T_max].
ActorOutput actor_from_thrusts(const Action& a, const QuadrotorParams& p);

Action hover_action(const QuadrotorParams& p);

/// Draws an initial state: x uniform in the cube of half-width
/// init_pos_half_width around x_d, v and Omega uniform per axis, R = rot_z(yaw)
/// times a small roll/pitch tilt, yaw uniform in (-pi, pi].
ResetResult sample_initial_state(std::mt19937_64& rng, const EnvConfig& cfg,
                                 const QuadrotorParams& p);

/// Unnormalized reward
///   c_x (1 - |e'_x|) - c_v |v| - c_Omega |Omega| - c_a |a - a_prev|,
/// with e'_x = (x - x_d) / e_x_max.
double raw_reward(const State& s, const Action& a, const Action& a_prev, const EnvConfig& cfg);

struct RewardRange {
  double min = 0.0;
  double max = 0.0;
};

/// Analytic anchors of the affine normalization: max = c_x, min at |e'_x| = 1
/// with |v| = v_max, |Omega| = omega_max and |a - a_prev| = 2 T_max.
RewardRange reward_range(const EnvConfig& cfg, const QuadrotorParams& p);

/// raw_reward mapped affinely onto [0, 1], clipped there, then scaled by
/// reward_scale. Always in [0, reward_scale].
double reward(const State& s, const Action& a, const Action& a_prev, const EnvConfig& cfg,
              const QuadrotorParams& p);

/// One MDP transition from s under actor output u at zero-based step index
/// `t`. Bound checks apply to the next state; the horizon ends the episode
/// when t + 1 == max_steps. Integrator faults propagate as exceptions.
StepResult step(const State& s, const ActorOutput& u, const Action& a_prev, int t,
                const EnvConfig& cfg, const QuadrotorParams& p);

// Stateful episode driver. Owns its RNG and step counter; not thread-safe,
// but independent instances may run concurrently.
class QuadrotorEnv {
 public:
  QuadrotorEnv(EnvConfig cfg, QuadrotorParams params);

  const State& reset();
  /// Resets to a caller-chosen state (used by tests and replay tools).
  const State& reset_to(const State& s);
  StepResult step(const ActorOutput& u);

  const State& state() const { return state_; }
  const Action& prev_action() const { return prev_action_; }
  int steps() const { return t_; }
  const EnvConfig& config() const { return cfg_; }
  const QuadrotorParams& params() const { return params_; }

 private:
  EnvConfig cfg_;
  QuadrotorParams params_;
  std::mt19937_64 rng_;
  State state_;
  Action prev_action_;
  int t_ = 0;
};

}  // namespace eqrl

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

#include "eqrl/environment.hpp"
#include "eqrl/mlp.hpp"
#include "eqrl/replay_buffer.hpp"

namespace eqrl {

enum class AgentMode { baseline, equivariant };
enum class Algorithm { td3, sac };

std::string_view to_string(AgentMode m);
std::string_view to_string(Algorithm a);
AgentMode parse_mode(std::string_view s);       // throws std::invalid_argument
Algorithm parse_algorithm(std::string_view s);  // throws std::invalid_argument

inline constexpr int kActionDim = 4;

/// 17 entries in equivariant mode, 18 in baseline mode.
int obs_dim(AgentMode mode);

/// Network input for a state.
///   equivariant: reduce_state of the error-frame state, with [x]1 and [x]3
///                divided by e_x_max (17 entries).
///   baseline:    (x - x_d)/e_x_max, v, R row-major, Omega (18 entries).
Eigen::VectorXd encode(const State& s, AgentMode mode, const EnvConfig& cfg);

struct Td3Config {
  double gamma = 0.99;
  double tau = 0.005;
  int batch_size = 256;
  std::int64_t warmup_steps = 1000;
  std::size_t buffer_capacity = 1'000'000;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  int hidden_units = 256;
  double exploration_noise = 0.1;  // std on the [-1, 1] action scale
  double target_noise = 0.2;
  double noise_clip = 0.5;
  int policy_delay = 2;

  void validate() const;
};

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  int batch_size = 256;
  std::int64_t warmup_steps = 1000;
  std::size_t buffer_capacity = 1'000'000;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  int hidden_units = 256;
  double alpha_lr = 3e-4;
  double target_entropy = -4.0;
  double initial_alpha = 1.0;

  void validate() const;
};

/// obs -> hidden -> hidden -> out_dim, ReLU hidden layers. The final layer
/// starts in Uniform(-3e-3, 3e-3).
Mlp make_actor(int obs_dim, int hidden, int out_dim, Activation out, std::mt19937_64& rng);
/// (obs, action) -> hidden -> hidden -> 1.
Mlp make_critic(int obs_dim, int hidden, std::mt19937_64& rng);

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  bool actor_updated = false;
  double alpha = 0.0;    // SAC only
  double entropy = 0.0;  // SAC only: -mean log pi on the batch
};

/// Concatenates observations and actions row-wise: the critic input.
Eigen::MatrixXd stack_inputs(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& action);

/// Mean-squared TD regression of `critic` toward `target`, one Adam step.
/// Returns the loss before the step.
double critic_regression_step(Mlp& critic, AdamState& opt, const Eigen::MatrixXd& inputs,
                              const Eigen::RowVectorXd& target);

class Td3Agent {
 public:
  Td3Agent(int obs_dim, Td3Config cfg, std::uint64_t seed);

  /// Deterministic actor output.
  ActorOutput act(const Eigen::VectorXd& obs) const;
  /// act() plus N(0, exploration_noise) noise, clipped to [-1, 1].
  ActorOutput explore(const Eigen::VectorXd& obs);

  UpdateStats update(const ReplayBuffer& buffer);
  UpdateStats update_on_batch(const Batch& batch);

  /// r + gamma (1 - done) min(Q1', Q2') at the smoothed target action.
  Eigen::RowVectorXd td_target(const Batch& batch, const Eigen::MatrixXd& smoothing_noise) const;

  const Mlp& actor() const { return actor_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& critic1_target() const { return critic1_target_; }
  const Mlp& critic2_target() const { return critic2_target_; }
  std::int64_t update_count() const { return updates_; }
  const Td3Config& config() const { return cfg_; }

 private:
  Td3Config cfg_;
  int obs_dim_;
  std::mt19937_64 rng_;
  Mlp actor_, actor_target_, critic1_, critic2_, critic1_target_, critic2_target_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_;
  std::int64_t updates_ = 0;
};

class SacAgent {
 public:
  SacAgent(int obs_dim, SacConfig cfg, std::uint64_t seed);

  /// tanh(mean): the deterministic policy used for evaluation.
  ActorOutput act(const Eigen::VectorXd& obs) const;
  /// Reparameterized squashed-Gaussian sample.
  ActorOutput explore(const Eigen::VectorXd& obs);

  UpdateStats update(const ReplayBuffer& buffer);
  UpdateStats update_on_batch(const Batch& batch);

  /// r + gamma (1 - done) (min(Q1', Q2')(s', a') - alpha log pi(a'|s')) with
  /// a' drawn from the current actor using the given noise.
  Eigen::RowVectorXd soft_target(const Batch& batch, const Eigen::MatrixXd& next_noise) const;

  /// d/d(log alpha) of -log(alpha) * mean(log pi + target_entropy).
  static double temperature_gradient(const Eigen::RowVectorXd& log_probs, double target_entropy);

  GaussianHead head(const Eigen::VectorXd& obs) const;

  double alpha() const;
  double log_alpha() const { return log_alpha_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& critic1_target() const { return critic1_target_; }
  const Mlp& critic2_target() const { return critic2_target_; }
  std::int64_t update_count() const { return updates_; }
  const SacConfig& config() const { return cfg_; }

 private:
  SacConfig cfg_;
  int obs_dim_;
  std::mt19937_64 rng_;
  Mlp actor_, critic1_, critic2_, critic1_target_, critic2_target_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_;
  ScalarAdam alpha_opt_;
  double log_alpha_ = 0.0;
  std::int64_t updates_ = 0;
};

/// Deterministic action of a trained actor network: tanh output for a
/// 4-output (TD3) actor, tanh(mean) for an 8-output (SAC) actor.
ActorOutput deterministic_action(const Mlp& actor, const Eigen::VectorXd& obs);

}  // namespace eqrl

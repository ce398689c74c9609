#include "eqrl/agents.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "eqrl/errors.hpp"
#include "eqrl/symmetry.hpp"

namespace eqrl {

std::string_view to_string(AgentMode m) {
  return m == AgentMode::baseline ? "baseline" : "equivariant";
}

std::string_view to_string(Algorithm a) { return a == Algorithm::td3 ? "td3" : "sac"; }

AgentMode parse_mode(std::string_view s) {
  if (s == "baseline") return AgentMode::baseline;
  if (s == "equivariant") return AgentMode::equivariant;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "' (expected baseline|equivariant)");
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "td3") return Algorithm::td3;
  if (s == "sac") return Algorithm::sac;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (expected td3|sac)");
}

int obs_dim(AgentMode mode) { return mode == AgentMode::equivariant ? 17 : 18; }

Eigen::VectorXd encode(const State& s, AgentMode mode, const EnvConfig& cfg) {
  State err = s;
  err.x = s.x - cfg.x_d;
  if (mode == AgentMode::equivariant) {
    const ReducedState r = reduce_state(err).reduced;
    Eigen::VectorXd out = Eigen::Map<const Eigen::VectorXd>(r.values.data(), ReducedState::kSize);
    out(0) /= cfg.e_x_max;
    out(1) /= cfg.e_x_max;
    return out;
  }
  Eigen::VectorXd out(18);
  out.segment<3>(0) = err.x / cfg.e_x_max;
  out.segment<3>(3) = s.v;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out(6 + 3 * i + j) = s.R(i, j);
  }
  out.segment<3>(15) = s.Omega;
  return out;
}

namespace {

void validate_common(double gamma, double tau, int batch, std::int64_t warmup,
                     std::size_t capacity, double actor_lr, double critic_lr, int hidden,
                     const char* who) {
  const std::string w(who);
  if (!(gamma > 0.0 && gamma < 1.0)) throw PreconditionError(w + ": gamma must lie in (0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw PreconditionError(w + ": tau must lie in (0, 1]");
  if (batch < 1) throw PreconditionError(w + ": batch_size must be positive");
  if (warmup < 0) throw PreconditionError(w + ": warmup_steps must be non-negative");
  if (capacity < static_cast<std::size_t>(batch)) {
    throw PreconditionError(w + ": buffer_capacity must be at least batch_size");
  }
  if (!(actor_lr > 0.0 && critic_lr > 0.0)) throw PreconditionError(w + ": learning rates must be positive");
  if (hidden < 1) throw PreconditionError(w + ": hidden_units must be positive");
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalFault(std::string(what) + " became non-finite");
}

// Squashed-Gaussian pass for a batch of actor outputs (8 x B).
struct SquashedBatch {
  Eigen::MatrixXd mean, log_std, std, noise, pre_tanh, action;
  Eigen::RowVectorXd log_prob;
  Eigen::MatrixXd in_range;  // 1 where the raw log-std was not clamped
};

SquashedBatch squash_batch(const Eigen::MatrixXd& out, const Eigen::MatrixXd& noise) {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  SquashedBatch s;
  const Eigen::MatrixXd raw = out.bottomRows(kActionDim);
  s.mean = out.topRows(kActionDim);
  s.log_std = raw.cwiseMax(GaussianHead::kLogStdMin).cwiseMin(GaussianHead::kLogStdMax);
  s.in_range = ((raw.array() >= GaussianHead::kLogStdMin) && (raw.array() <= GaussianHead::kLogStdMax))
                   .cast<double>();
  s.std = s.log_std.array().exp();
  s.noise = noise;
  s.pre_tanh = s.mean.array() + s.std.array() * noise.array();
  const double edge = std::nextafter(1.0, 0.0);
  s.action = s.pre_tanh.array().tanh().cwiseMax(-edge).cwiseMin(edge);
  s.log_prob.resize(out.cols());
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < kActionDim; ++i) {
      lp += -0.5 * noise(i, c) * noise(i, c) - s.log_std(i, c) - kHalfLog2Pi -
            log1m_tanh_sq(s.pre_tanh(i, c));
    }
    s.log_prob(c) = lp;
  }
  return s;
}

}  // namespace

void Td3Config::validate() const {
  validate_common(gamma, tau, batch_size, warmup_steps, buffer_capacity, actor_lr, critic_lr,
                  hidden_units, "Td3Config");
  if (policy_delay < 1) throw PreconditionError("Td3Config: policy_delay must be at least 1");
  if (!(exploration_noise >= 0.0 && target_noise >= 0.0 && noise_clip >= 0.0)) {
    throw PreconditionError("Td3Config: noise parameters must be non-negative");
  }
}

void SacConfig::validate() const {
  validate_common(gamma, tau, batch_size, warmup_steps, buffer_capacity, actor_lr, critic_lr,
                  hidden_units, "SacConfig");
  if (!(alpha_lr > 0.0)) throw PreconditionError("SacConfig: alpha_lr must be positive");
  if (!(initial_alpha > 0.0)) throw PreconditionError("SacConfig: initial_alpha must be positive");
}

Mlp make_actor(int obs_dim, int hidden, int out_dim, Activation out, std::mt19937_64& rng) {
  Mlp net({obs_dim, hidden, hidden, out_dim}, {Activation::relu, Activation::relu, out});
  net.init_uniform(rng, 3e-3);
  return net;
}

Mlp make_critic(int obs_dim, int hidden, std::mt19937_64& rng) {
  Mlp net({obs_dim + kActionDim, hidden, hidden, 1},
          {Activation::relu, Activation::relu, Activation::identity});
  net.init_uniform(rng);
  return net;
}

Eigen::MatrixXd stack_inputs(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& action) {
  Eigen::MatrixXd sa(obs.rows() + action.rows(), obs.cols());
  sa.topRows(obs.rows()) = obs;
  sa.bottomRows(action.rows()) = action;
  return sa;
}

double critic_regression_step(Mlp& critic, AdamState& opt, const Eigen::MatrixXd& inputs,
                              const Eigen::RowVectorXd& target) {
  ForwardCache cache;
  const Eigen::MatrixXd q = critic.forward(inputs, cache);
  const Eigen::RowVectorXd diff = q.row(0) - target;
  const double n = static_cast<double>(inputs.cols());
  const double loss = diff.squaredNorm() / n;
  check_finite(loss, "critic loss");
  const MlpGradient g = critic.backward(cache, (2.0 / n) * diff);
  adam_step(critic, g, opt);
  return loss;
}

ActorOutput deterministic_action(const Mlp& actor, const Eigen::VectorXd& obs) {
  const Eigen::VectorXd out = actor.forward(obs);
  ActorOutput a;
  if (out.size() == kActionDim) {
    a.u = out;
  } else if (out.size() == 2 * kActionDim) {
    a.u = out.head<kActionDim>().array().tanh();
  } else {
    throw std::invalid_argument("deterministic_action: actor must have 4 or 8 outputs");
  }
  return a;
}

// ---------------------------------------------------------------- TD3

Td3Agent::Td3Agent(int obs_dim, Td3Config cfg, std::uint64_t seed)
    : cfg_(cfg), obs_dim_(obs_dim), rng_(seed) {
  cfg_.validate();
  actor_ = make_actor(obs_dim, cfg_.hidden_units, kActionDim, Activation::tanh, rng_);
  critic1_ = make_critic(obs_dim, cfg_.hidden_units, rng_);
  critic2_ = make_critic(obs_dim, cfg_.hidden_units, rng_);
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  actor_opt_ = AdamState::for_network(actor_, cfg_.actor_lr);
  critic1_opt_ = AdamState::for_network(critic1_, cfg_.critic_lr);
  critic2_opt_ = AdamState::for_network(critic2_, cfg_.critic_lr);
}

ActorOutput Td3Agent::act(const Eigen::VectorXd& obs) const { return deterministic_action(actor_, obs); }

ActorOutput Td3Agent::explore(const Eigen::VectorXd& obs) {
  ActorOutput a = act(obs);
  std::normal_distribution<double> noise(0.0, cfg_.exploration_noise);
  for (int i = 0; i < kActionDim; ++i) a.u(i) = std::clamp(a.u(i) + noise(rng_), -1.0, 1.0);
  return a;
}

Eigen::RowVectorXd Td3Agent::td_target(const Batch& b, const Eigen::MatrixXd& smoothing_noise) const {
  Eigen::MatrixXd next_a = actor_target_.forward(b.next_obs);
  next_a += (cfg_.target_noise * smoothing_noise).cwiseMax(-cfg_.noise_clip).cwiseMin(cfg_.noise_clip);
  next_a = next_a.cwiseMax(-1.0).cwiseMin(1.0);
  const Eigen::MatrixXd sa = stack_inputs(b.next_obs, next_a);
  const Eigen::RowVectorXd q1 = critic1_target_.forward(sa).row(0);
  const Eigen::RowVectorXd q2 = critic2_target_.forward(sa).row(0);
  const Eigen::RowVectorXd not_done = (1.0 - b.done.array()).matrix();
  return b.reward + cfg_.gamma * not_done.cwiseProduct(q1.cwiseMin(q2));
}

UpdateStats Td3Agent::update(const ReplayBuffer& buffer) {
  return update_on_batch(buffer.sample(static_cast<std::size_t>(cfg_.batch_size), rng_));
}

UpdateStats Td3Agent::update_on_batch(const Batch& b) {
  UpdateStats stats;
  const Eigen::MatrixXd noise = gaussian_matrix(kActionDim, b.obs.cols(), rng_);
  const Eigen::RowVectorXd y = td_target(b, noise);

  const Eigen::MatrixXd sa = stack_inputs(b.obs, b.action);
  stats.critic_loss = critic_regression_step(critic1_, critic1_opt_, sa, y) +
                      critic_regression_step(critic2_, critic2_opt_, sa, y);
  ++updates_;

  if (updates_ % cfg_.policy_delay == 0) {
    // Deterministic policy gradient through critic 1: L = -mean Q1(s, pi(s)).
    const double n = static_cast<double>(b.obs.cols());
    ForwardCache actor_cache, critic_cache;
    const Eigen::MatrixXd a = actor_.forward(b.obs, actor_cache);
    const Eigen::MatrixXd q = critic1_.forward(stack_inputs(b.obs, a), critic_cache);
    stats.actor_loss = -q.mean();
    check_finite(stats.actor_loss, "actor loss");
    Eigen::MatrixXd grad_in;
    critic1_.backward(critic_cache, Eigen::RowVectorXd::Constant(b.obs.cols(), -1.0 / n), &grad_in);
    const MlpGradient g = actor_.backward(actor_cache, grad_in.bottomRows(kActionDim));
    adam_step(actor_, g, actor_opt_);
    stats.actor_updated = true;

    actor_target_.soft_update_from(actor_, cfg_.tau);
    critic1_target_.soft_update_from(critic1_, cfg_.tau);
    critic2_target_.soft_update_from(critic2_, cfg_.tau);
  }
  return stats;
}

// ---------------------------------------------------------------- SAC

SacAgent::SacAgent(int obs_dim, SacConfig cfg, std::uint64_t seed)
    : cfg_(cfg), obs_dim_(obs_dim), rng_(seed) {
  cfg_.validate();
  actor_ = make_actor(obs_dim, cfg_.hidden_units, 2 * kActionDim, Activation::identity, rng_);
  critic1_ = make_critic(obs_dim, cfg_.hidden_units, rng_);
  critic2_ = make_critic(obs_dim, cfg_.hidden_units, rng_);
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  actor_opt_ = AdamState::for_network(actor_, cfg_.actor_lr);
  critic1_opt_ = AdamState::for_network(critic1_, cfg_.critic_lr);
  critic2_opt_ = AdamState::for_network(critic2_, cfg_.critic_lr);
  alpha_opt_.lr = cfg_.alpha_lr;
  log_alpha_ = std::log(cfg_.initial_alpha);
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

GaussianHead SacAgent::head(const Eigen::VectorXd& obs) const {
  const Eigen::VectorXd out = actor_.forward(obs);
  return GaussianHead::make(out.head<kActionDim>(), out.tail<kActionDim>());
}

ActorOutput SacAgent::act(const Eigen::VectorXd& obs) const { return deterministic_action(actor_, obs); }

ActorOutput SacAgent::explore(const Eigen::VectorXd& obs) {
  const SquashedSample s = sample_gaussian_head(head(obs), rng_);
  return ActorOutput{s.action};
}

double SacAgent::temperature_gradient(const Eigen::RowVectorXd& log_probs, double target_entropy) {
  return -(log_probs.array() + target_entropy).mean();
}

Eigen::RowVectorXd SacAgent::soft_target(const Batch& b, const Eigen::MatrixXd& next_noise) const {
  const SquashedBatch next = squash_batch(actor_.forward(b.next_obs), next_noise);
  const Eigen::MatrixXd sa = stack_inputs(b.next_obs, next.action);
  const Eigen::RowVectorXd q1 = critic1_target_.forward(sa).row(0);
  const Eigen::RowVectorXd q2 = critic2_target_.forward(sa).row(0);
  const Eigen::RowVectorXd soft_v = q1.cwiseMin(q2) - alpha() * next.log_prob;
  const Eigen::RowVectorXd not_done = (1.0 - b.done.array()).matrix();
  return b.reward + cfg_.gamma * not_done.cwiseProduct(soft_v);
}

UpdateStats SacAgent::update(const ReplayBuffer& buffer) {
  return update_on_batch(buffer.sample(static_cast<std::size_t>(cfg_.batch_size), rng_));
}

UpdateStats SacAgent::update_on_batch(const Batch& b) {
  UpdateStats stats;
  const Eigen::Index n_batch = b.obs.cols();
  const double n = static_cast<double>(n_batch);
  const double alpha = this->alpha();

  const Eigen::RowVectorXd y = soft_target(b, gaussian_matrix(kActionDim, n_batch, rng_));
  const Eigen::MatrixXd sa_data = stack_inputs(b.obs, b.action);
  stats.critic_loss = critic_regression_step(critic1_, critic1_opt_, sa_data, y) +
                      critic_regression_step(critic2_, critic2_opt_, sa_data, y);

  // Actor: L = mean(alpha log pi(a|s) - min(Q1, Q2)(s, a)), a reparameterized.
  ForwardCache actor_cache, c1_cache, c2_cache;
  const Eigen::MatrixXd out = actor_.forward(b.obs, actor_cache);
  const SquashedBatch s = squash_batch(out, gaussian_matrix(kActionDim, n_batch, rng_));
  const Eigen::MatrixXd sa = stack_inputs(b.obs, s.action);
  const Eigen::RowVectorXd q1 = critic1_.forward(sa, c1_cache).row(0);
  const Eigen::RowVectorXd q2 = critic2_.forward(sa, c2_cache).row(0);
  const Eigen::RowVectorXd pick1 = (q1.array() <= q2.array()).cast<double>().matrix();
  const Eigen::RowVectorXd q_min = q1.cwiseMin(q2);
  stats.actor_loss = (alpha * s.log_prob - q_min).mean();
  check_finite(stats.actor_loss, "actor loss");

  Eigen::MatrixXd g1_in, g2_in;
  critic1_.backward(c1_cache, (-1.0 / n) * pick1, &g1_in);
  critic2_.backward(c2_cache, (-1.0 / n) * (1.0 - pick1.array()).matrix(), &g2_in);
  const Eigen::MatrixXd dq_da = g1_in.bottomRows(kActionDim) + g2_in.bottomRows(kActionDim);

  // d log pi / dz = 2 tanh(z); the Gaussian part depends on the noise only,
  // apart from the -log_std term.
  const Eigen::ArrayXXd tanh_z = s.pre_tanh.array().tanh();
  const Eigen::ArrayXXd dL_dz = (alpha / n) * 2.0 * tanh_z + dq_da.array() * (1.0 - tanh_z.square());
  Eigen::MatrixXd grad_out(2 * kActionDim, n_batch);
  grad_out.topRows(kActionDim) = dL_dz.matrix();
  grad_out.bottomRows(kActionDim) =
      ((dL_dz * s.std.array() * s.noise.array() - alpha / n) * s.in_range.array()).matrix();
  const MlpGradient g = actor_.backward(actor_cache, grad_out);
  adam_step(actor_, g, actor_opt_);
  stats.actor_updated = true;

  const double grad_log_alpha = temperature_gradient(s.log_prob, cfg_.target_entropy);
  log_alpha_ = alpha_opt_.update(log_alpha_, grad_log_alpha);
  check_finite(log_alpha_, "log temperature");
  stats.alpha = this->alpha();
  stats.entropy = -s.log_prob.mean();

  critic1_target_.soft_update_from(critic1_, cfg_.tau);
  critic2_target_.soft_update_from(critic2_, cfg_.tau);
  ++updates_;
  return stats;
}

}  // namespace eqrl

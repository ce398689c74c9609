#include "eqrl/environment.hpp"

#include <algorithm>
#include <cmath>

namespace eqrl {

void EnvConfig::validate() const {
  if (!x_d.allFinite()) throw PreconditionError("EnvConfig: x_d must be finite");
  if (!(e_x_max > 0.0)) throw PreconditionError("EnvConfig: e_x_max must be positive");
  if (!(c_x >= 0.0 && c_v >= 0.0 && c_omega >= 0.0 && c_a >= 0.0)) {
    throw PreconditionError("EnvConfig: reward weights must be non-negative");
  }
  if (!(reward_scale > 0.0)) throw PreconditionError("EnvConfig: reward_scale must be positive");
  if (!(dt > 0.0)) throw PreconditionError("EnvConfig: dt must be positive");
  if (max_steps < 1) throw PreconditionError("EnvConfig: max_steps must be at least 1");
  if (!(init_pos_half_width >= 0.0 && init_vel >= 0.0 && init_tilt >= 0.0 && init_omega >= 0.0)) {
    throw PreconditionError("EnvConfig: reset bounds must be non-negative");
  }
  if (!(init_pos_half_width <= e_x_max)) {
    throw PreconditionError("EnvConfig: init_pos_half_width must not exceed e_x_max");
  }
  if (!(v_max > 0.0 && omega_max > 0.0)) {
    throw PreconditionError("EnvConfig: v_max and omega_max must be positive");
  }
}

std::string_view to_string(DoneReason r) {
  switch (r) {
    case DoneReason::none: return "none";
    case DoneReason::position_bound: return "position_bound";
    case DoneReason::velocity_bound: return "velocity_bound";
    case DoneReason::omega_bound: return "omega_bound";
    case DoneReason::horizon: return "horizon";
  }
  return "none";
}

Action thrusts_from_actor(const ActorOutput& out, const QuadrotorParams& p) {
  Action a;
  for (int i = 0; i < 4; ++i) {
    const double u = std::clamp(out.u(i), -1.0, 1.0);
    a.thrust(i) = std::clamp(0.5 * (u + 1.0) * p.thrust_max, 0.0, p.thrust_max);
  }
  return a;
}

ActorOutput actor_from_thrusts(const Action& a, const QuadrotorParams& p) {
  ActorOutput out;
  for (int i = 0; i < 4; ++i) {
    const double t = std::clamp(a.thrust(i), 0.0, p.thrust_max);
    out.u(i) = 2.0 * t / p.thrust_max - 1.0;
  }
  return out;
}

Action hover_action(const QuadrotorParams& p) { return Action::uniform(p.hover_thrust()); }

namespace {

Mat3 rot_x(double a) {
  Mat3 R;
  R << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return R;
}

Mat3 rot_y(double a) {
  Mat3 R;
  R << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return R;
}

double uniform(std::mt19937_64& rng, double half_width) {
  if (half_width == 0.0) return 0.0;
  return std::uniform_real_distribution<double>(-half_width, half_width)(rng);
}

}  // namespace

ResetResult sample_initial_state(std::mt19937_64& rng, const EnvConfig& cfg,
                                 const QuadrotorParams& p) {
  ResetResult r;
  for (int i = 0; i < 3; ++i) r.state.x(i) = cfg.x_d(i) + uniform(rng, cfg.init_pos_half_width);
  for (int i = 0; i < 3; ++i) r.state.v(i) = uniform(rng, cfg.init_vel);
  const double yaw = wrap_angle(uniform(rng, kPi));
  const double pitch = uniform(rng, cfg.init_tilt);
  const double roll = uniform(rng, cfg.init_tilt);
  r.state.R = reorthonormalize(rot_z(yaw) * rot_y(pitch) * rot_x(roll));
  for (int i = 0; i < 3; ++i) r.state.Omega(i) = uniform(rng, cfg.init_omega);
  r.prev_action = hover_action(p);
  return r;
}

double raw_reward(const State& s, const Action& a, const Action& a_prev, const EnvConfig& cfg) {
  const double ex = ((s.x - cfg.x_d) / cfg.e_x_max).norm();
  return cfg.c_x * (1.0 - ex) - cfg.c_v * s.v.norm() - cfg.c_omega * s.Omega.norm() -
         cfg.c_a * (a.thrust - a_prev.thrust).norm();
}

RewardRange reward_range(const EnvConfig& cfg, const QuadrotorParams& p) {
  const double da_max = 2.0 * p.thrust_max;
  return RewardRange{-(cfg.c_v * cfg.v_max + cfg.c_omega * cfg.omega_max + cfg.c_a * da_max),
                     cfg.c_x};
}

double reward(const State& s, const Action& a, const Action& a_prev, const EnvConfig& cfg,
              const QuadrotorParams& p) {
  const RewardRange range = reward_range(cfg, p);
  const double r = raw_reward(s, a, a_prev, cfg);
  // Per-axis bounds allow |e'_x| up to sqrt(3) near the corners of the box,
  // which is the only way r can dip under range.min.
  const double normalized = std::clamp((r - range.min) / (range.max - range.min), 0.0, 1.0);
  return cfg.reward_scale * normalized;
}

StepResult step(const State& s, const ActorOutput& u, const Action& a_prev, int t,
                const EnvConfig& cfg, const QuadrotorParams& p) {
  StepResult out;
  out.action = thrusts_from_actor(u, p);
  out.reward = reward(s, out.action, a_prev, cfg, p);
  out.next_state = rk4_step(s, out.action, cfg.dt, p);

  const State& n = out.next_state;
  const Vec3 err = n.x - cfg.x_d;
  if ((err.array().abs() > cfg.e_x_max).any()) {
    out.done_reason = DoneReason::position_bound;
  } else if (n.v.norm() > cfg.v_max) {
    out.done_reason = DoneReason::velocity_bound;
  } else if (n.Omega.norm() > cfg.omega_max) {
    out.done_reason = DoneReason::omega_bound;
  } else if (t + 1 >= cfg.max_steps) {
    out.done_reason = DoneReason::horizon;
  }
  out.done = out.done_reason != DoneReason::none;
  return out;
}

QuadrotorEnv::QuadrotorEnv(EnvConfig cfg, QuadrotorParams params)
    : cfg_(std::move(cfg)), params_(std::move(params)), rng_(cfg_.seed) {
  cfg_.validate();
  params_.validate();
  prev_action_ = hover_action(params_);
}

const State& QuadrotorEnv::reset() {
  ResetResult r = sample_initial_state(rng_, cfg_, params_);
  state_ = r.state;
  prev_action_ = r.prev_action;
  t_ = 0;
  return state_;
}

const State& QuadrotorEnv::reset_to(const State& s) {
  state_ = s;
  prev_action_ = hover_action(params_);
  t_ = 0;
  return state_;
}

StepResult QuadrotorEnv::step(const ActorOutput& u) {
  // a_{-1} = a_0: the first command carries no chattering penalty.
  if (t_ == 0) prev_action_ = thrusts_from_actor(u, params_);
  StepResult r = eqrl::step(state_, u, prev_action_, t_, cfg_, params_);
  state_ = r.next_state;
  prev_action_ = r.action;
  ++t_;
  return r;
}

}  // namespace eqrl

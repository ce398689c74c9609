#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "eqrl/environment.hpp"
#include "eqrl/symmetry.hpp"
#include "eqrl/verify.hpp"

namespace eqrl {
namespace {

TEST(Environment, ActorToThrustMapping) {
  const QuadrotorParams p;
  ActorOutput u;
  u.u << -1.0, 1.0, 0.0, -0.5;
  const Action a = thrusts_from_actor(u, p);
  EXPECT_EQ(a.thrust(0), 0.0);
  EXPECT_EQ(a.thrust(1), p.thrust_max);
  EXPECT_DOUBLE_EQ(a.thrust(2), 0.5 * p.thrust_max);
  EXPECT_DOUBLE_EQ(a.thrust(3), p.hover_thrust());  // T_max = m g: hover at u = -1/2
  EXPECT_LT((actor_from_thrusts(a, p).u - u.u).norm(), 1e-15);
}

TEST(Environment, ThrustsAreClampedToActuatorRange) {
  const QuadrotorParams p;
  ActorOutput u;
  u.u << -3.0, 7.0, std::nextafter(1.0, 2.0), -1.0000001;
  const Action a = thrusts_from_actor(u, p);
  EXPECT_TRUE((a.thrust.array() >= 0.0).all());
  EXPECT_TRUE((a.thrust.array() <= p.thrust_max).all());
}

TEST(Environment, RewardAtGoalIsMaximal) {
  const EnvConfig cfg;
  const QuadrotorParams p;
  State s;
  const Action h = hover_action(p);
  EXPECT_DOUBLE_EQ(raw_reward(s, h, h, cfg), cfg.c_x);
  EXPECT_DOUBLE_EQ(reward(s, h, h, cfg, p), cfg.reward_scale);
}

TEST(Environment, RewardRangeAnchors) {
  const EnvConfig cfg;
  const QuadrotorParams p;
  const RewardRange r = reward_range(cfg, p);
  EXPECT_DOUBLE_EQ(r.max, 2.0);
  EXPECT_NEAR(r.min, -(0.15 * 8.0 + 0.2 * 25.0 + 0.03 * 2.0 * 9.81), 1e-12);

  // The worst case named by the anchors maps to exactly 0.
  State s;
  s.x = Vec3(cfg.e_x_max, 0.0, 0.0);
  s.v = Vec3(0.0, cfg.v_max, 0.0);
  s.Omega = Vec3(0.0, 0.0, cfg.omega_max);
  const Action lo = Action::uniform(0.0);
  Action hi = lo;
  hi.thrust(0) = 2.0 * p.thrust_max;  // |a - a_prev| = 2 T_max
  EXPECT_NEAR(raw_reward(s, hi, lo, cfg), r.min, 1e-12);
  EXPECT_NEAR(reward(s, hi, lo, cfg, p), 0.0, 1e-15);
}

TEST(Environment, RewardHandValue) {
  EnvConfig cfg;
  const QuadrotorParams p;
  State s;
  s.x = Vec3(0.0, 1.5, 0.0);  // |e'| = 0.5
  s.v = Vec3(1.0, 0.0, 0.0);
  const Action h = hover_action(p);
  const double raw = 2.0 * 0.5 - 0.15 * 1.0;
  EXPECT_NEAR(raw_reward(s, h, h, cfg), raw, 1e-15);
  const RewardRange r = reward_range(cfg, p);
  EXPECT_NEAR(reward(s, h, h, cfg, p), 0.1 * (raw - r.min) / (r.max - r.min), 1e-15);
}

TEST(Environment, RewardIsClippedAtTheBoxCorners) {
  const EnvConfig cfg;
  const QuadrotorParams p;
  State s;
  s.x = Vec3(3.0, 3.0, 3.0);
  s.v = Vec3(8.0, 0.0, 0.0);
  s.Omega = Vec3(25.0, 0.0, 0.0);
  Action a = Action::uniform(p.thrust_max), b = Action::uniform(0.0);
  EXPECT_LT(raw_reward(s, a, b, cfg), reward_range(cfg, p).min);
  EXPECT_EQ(reward(s, a, b, cfg, p), 0.0);
}

TEST(Environment, RewardIsRotationInvariant) {
  std::mt19937_64 rng(14);
  EXPECT_LT(reward_invariance_error(rng, 500, EnvConfig{}, QuadrotorParams{}), 1e-12);
}

TEST(Environment, TerminationReasonsInPriorityOrder) {
  const EnvConfig cfg;
  const QuadrotorParams p;
  ActorOutput hover = actor_from_thrusts(hover_action(p), p);

  State s;
  s.x = Vec3(2.9999, 0.0, 0.0);
  s.v = Vec3(20.0, 0.0, 0.0);  // also beyond v_max
  StepResult r = step(s, hover, hover_action(p), 0, cfg, p);
  EXPECT_EQ(r.done_reason, DoneReason::position_bound);
  EXPECT_TRUE(r.terminal());

  s = State{};
  s.v = Vec3(0.0, 8.5, 0.0);
  r = step(s, hover, hover_action(p), 0, cfg, p);
  EXPECT_EQ(r.done_reason, DoneReason::velocity_bound);

  s = State{};
  s.Omega = Vec3(0.0, 0.0, 26.0);
  r = step(s, hover, hover_action(p), 0, cfg, p);
  EXPECT_EQ(r.done_reason, DoneReason::omega_bound);

  s = State{};
  r = step(s, hover, hover_action(p), cfg.max_steps - 1, cfg, p);
  EXPECT_EQ(r.done_reason, DoneReason::horizon);
  EXPECT_TRUE(r.done);
  EXPECT_FALSE(r.terminal());

  r = step(s, hover, hover_action(p), cfg.max_steps - 2, cfg, p);
  EXPECT_FALSE(r.done);
}

TEST(Environment, HoverEpisodeRunsToHorizon) {
  EnvConfig cfg;
  QuadrotorEnv env(cfg, QuadrotorParams{});
  env.reset_to(State{});
  const ActorOutput hover = actor_from_thrusts(hover_action(env.params()), env.params());
  double ret = 0.0;
  StepResult r;
  int steps = 0;
  do {
    r = env.step(hover);
    ret += r.reward;
    ++steps;
  } while (!r.done);
  EXPECT_EQ(steps, cfg.max_steps);
  EXPECT_EQ(r.done_reason, DoneReason::horizon);
  EXPECT_NEAR(ret, cfg.max_steps * cfg.reward_scale, 1e-9);
  EXPECT_LT(env.state().x.norm(), 1e-12);
}

TEST(Environment, FirstCommandCarriesNoChatterPenalty) {
  QuadrotorEnv env(EnvConfig{}, QuadrotorParams{});
  env.reset_to(State{});
  ActorOutput u;
  u.u << 0.9, -0.9, 0.9, -0.9;
  const StepResult r = env.step(u);
  const Action a = thrusts_from_actor(u, env.params());
  EXPECT_DOUBLE_EQ(r.reward, reward(State{}, a, a, env.config(), env.params()));
  EXPECT_EQ(env.prev_action().thrust, a.thrust);
}

TEST(Environment, ResetIsSeededAndBounded) {
  EnvConfig cfg;
  cfg.seed = 77;
  QuadrotorEnv a(cfg, QuadrotorParams{}), b(cfg, QuadrotorParams{});
  for (int i = 0; i < 50; ++i) {
    const State sa = a.reset();
    const State sb = b.reset();
    EXPECT_EQ(sa.x, sb.x);
    EXPECT_EQ(sa.R, sb.R);
    EXPECT_LE((sa.x - cfg.x_d).cwiseAbs().maxCoeff(), cfg.init_pos_half_width);
    EXPECT_LE(sa.v.cwiseAbs().maxCoeff(), cfg.init_vel);
    EXPECT_LE(sa.Omega.cwiseAbs().maxCoeff(), cfg.init_omega);
    EXPECT_TRUE(is_rotation(sa.R));
    // Tilt of the body z axis from vertical stays within the two tilt angles.
    EXPECT_GE(sa.R(2, 2), std::cos(cfg.init_tilt) * std::cos(cfg.init_tilt) - 1e-12);
  }
}

TEST(Environment, ConfigValidation) {
  EnvConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg = EnvConfig{};
  cfg.init_pos_half_width = 4.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
}

}  // namespace
}  // namespace eqrl

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "eqrl/agents.hpp"
#include "eqrl/symmetry.hpp"
#include "eqrl/verify.hpp"

namespace eqrl {
namespace {

Td3Config small_td3() {
  Td3Config c;
  c.hidden_units = 32;
  c.batch_size = 16;
  c.buffer_capacity = 1000;
  return c;
}

SacConfig small_sac() {
  SacConfig c;
  c.hidden_units = 32;
  c.batch_size = 16;
  c.buffer_capacity = 1000;
  return c;
}

Batch random_batch(int dim, int n, std::mt19937_64& rng, double done) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Batch b;
  b.obs = Eigen::MatrixXd::NullaryExpr(dim, n, [&] { return u(rng); });
  b.next_obs = Eigen::MatrixXd::NullaryExpr(dim, n, [&] { return u(rng); });
  b.action = Eigen::MatrixXd::NullaryExpr(kActionDim, n, [&] { return u(rng); });
  b.reward = Eigen::RowVectorXd::NullaryExpr(n, [&] { return 0.05 * (u(rng) + 1.0); });
  b.done = Eigen::RowVectorXd::Constant(n, done);
  return b;
}

TEST(Encoding, Dimensions) {
  EXPECT_EQ(obs_dim(AgentMode::equivariant), 17);
  EXPECT_EQ(obs_dim(AgentMode::baseline), 18);
  const EnvConfig cfg;
  EXPECT_EQ(encode(State{}, AgentMode::equivariant, cfg).size(), 17);
  EXPECT_EQ(encode(State{}, AgentMode::baseline, cfg).size(), 18);
}

TEST(Encoding, BaselineLayout) {
  EnvConfig cfg;
  cfg.x_d = Vec3(0.0, 0.0, -1.0);
  State s;
  s.x = Vec3(0.3, -0.6, -1.0);
  s.v = Vec3(1, 2, 3);
  s.Omega = Vec3(4, 5, 6);
  const Eigen::VectorXd o = encode(s, AgentMode::baseline, cfg);
  EXPECT_DOUBLE_EQ(o(0), 0.1);
  EXPECT_DOUBLE_EQ(o(1), -0.2);
  EXPECT_DOUBLE_EQ(o(2), 0.0);
  EXPECT_EQ(o(3), 1.0);
  EXPECT_EQ(o(6), 1.0);  // R11
  EXPECT_EQ(o(10), 1.0);  // R22
  EXPECT_EQ(o(17), 6.0);
}

TEST(Encoding, EquivariantUsesTheErrorFrame) {
  EnvConfig cfg;
  cfg.x_d = Vec3(0.0, 0.0, -1.0);
  State s;
  s.x = Vec3(0.0, 3.0, 0.5);
  const Eigen::VectorXd o = encode(s, AgentMode::equivariant, cfg);
  EXPECT_NEAR(o(0), 1.0, 1e-15);  // 3 m horizontal / e_x_max
  EXPECT_NEAR(o(1), 0.5, 1e-15);  // 1.5 m vertical / e_x_max
}

TEST(Encoding, NetworksAreInvariantInEquivariantMode) {
  std::mt19937_64 rng(5);
  EXPECT_LT(network_invariance_error(rng, 100, EnvConfig{}, QuadrotorParams{}, 32), 1e-10);
}

TEST(Encoding, BaselineNetworksAreNotInvariant) {
  std::mt19937_64 rng(5);
  const Mlp actor = make_actor(18, 32, kActionDim, Activation::tanh, rng);
  const EnvConfig cfg;
  State s = random_state(rng);
  s.x = Vec3(1.0, 0.5, 0.2);
  const State gs = act_on_state(s, GroupElement(1.0));
  const double diff = (actor.forward(encode(s, AgentMode::baseline, cfg)) -
                       actor.forward(encode(gs, AgentMode::baseline, cfg))).norm();
  EXPECT_GT(diff, 1e-6);
}

TEST(Td3, TargetIsRewardOnTerminalTransitions) {
  std::mt19937_64 rng(2);
  const Td3Agent agent(17, small_td3(), 1);
  const Batch b = random_batch(17, 8, rng, 1.0);
  const Eigen::RowVectorXd y = agent.td_target(b, Eigen::MatrixXd::Zero(kActionDim, 8));
  EXPECT_EQ(y, b.reward);
}

TEST(Td3, TargetUsesClippedSmoothingAndTwinMinimum) {
  std::mt19937_64 rng(3);
  const Td3Agent agent(17, small_td3(), 1);
  const Batch b = random_batch(17, 6, rng, 0.0);
  Eigen::MatrixXd noise = Eigen::MatrixXd::Constant(kActionDim, 6, 10.0);  // clipped to +0.5
  noise.col(1).setConstant(-10.0);
  noise.col(2).setConstant(0.5);                                           // 0.2 * 0.5 = 0.1
  const Eigen::RowVectorXd y = agent.td_target(b, noise);
  for (int k = 0; k < 6; ++k) {
    const Eigen::VectorXd a = agent.actor_target().forward(b.next_obs.col(k));
    const double eps = k == 1 ? -0.5 : (k == 2 ? 0.1 : 0.5);
    Eigen::VectorXd sa(21);
    sa.head(17) = b.next_obs.col(k);
    for (int i = 0; i < 4; ++i) sa(17 + i) = std::clamp(a(i) + eps, -1.0, 1.0);
    const double q1 = agent.critic1_target().forward(sa)(0, 0);
    const double q2 = agent.critic2_target().forward(sa)(0, 0);
    EXPECT_NEAR(y(k), b.reward(k) + 0.99 * std::min(q1, q2), 1e-14);
  }
}

TEST(Td3, PolicyDelayAndTargetTracking) {
  std::mt19937_64 rng(4);
  Td3Agent agent(17, small_td3(), 9);
  const Batch b = random_batch(17, 16, rng, 0.0);
  const Mlp actor0 = agent.actor();
  const Mlp target0 = agent.actor_target();
  const UpdateStats s1 = agent.update_on_batch(b);
  EXPECT_FALSE(s1.actor_updated);
  EXPECT_TRUE(agent.actor() == actor0);
  EXPECT_TRUE(agent.actor_target() == target0);
  const UpdateStats s2 = agent.update_on_batch(b);
  EXPECT_TRUE(s2.actor_updated);
  EXPECT_FALSE(agent.actor() == actor0);
  // target <- 0.005 online + 0.995 target after one actor step.
  const auto& tw = agent.actor_target().layers()[0].weight;
  const Eigen::MatrixXd expected =
      0.005 * agent.actor().layers()[0].weight + 0.995 * target0.layers()[0].weight;
  EXPECT_LT((tw - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Td3, CriticFitsFixedTargets) {
  std::mt19937_64 rng(5);
  Mlp critic = make_critic(5, 32, rng);
  AdamState opt = AdamState::for_network(critic, 1e-3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(9, 64, [&] { return u(rng); });
  const Eigen::RowVectorXd y = x.row(0) - 0.5 * x.row(3);
  const double first = critic_regression_step(critic, opt, x, y);
  double last = first;
  for (int i = 0; i < 500; ++i) last = critic_regression_step(critic, opt, x, y);
  EXPECT_LT(last, 0.01 * first);
}

TEST(Td3, ExplorationStaysInRangeAndIsSeeded) {
  Td3Agent a(17, small_td3(), 3), b(17, small_td3(), 3);
  const Eigen::VectorXd obs = Eigen::VectorXd::Ones(17);
  for (int i = 0; i < 100; ++i) {
    const ActorOutput ua = a.explore(obs), ub = b.explore(obs);
    EXPECT_EQ(ua.u, ub.u);
    EXPECT_LE(ua.u.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Td3, UpdatesAreDeterministic) {
  std::mt19937_64 rng(6);
  ReplayBuffer buf(17, 100);
  for (int i = 0; i < 40; ++i) {
    Transition t;
    t.obs = Eigen::VectorXd::Random(17);
    t.next_obs = Eigen::VectorXd::Random(17);
    t.action = Eigen::Vector4d::Random();
    t.reward = 0.05;
    buf.add(t);
  }
  Td3Agent a(17, small_td3(), 11), b(17, small_td3(), 11);
  for (int i = 0; i < 4; ++i) {
    a.update(buf);
    b.update(buf);
  }
  EXPECT_TRUE(a.actor() == b.actor());
  EXPECT_TRUE(a.critic2() == b.critic2());
}

TEST(Sac, SoftTargetIsRewardOnTerminalTransitions) {
  std::mt19937_64 rng(7);
  const SacAgent agent(17, small_sac(), 1);
  const Batch b = random_batch(17, 8, rng, 1.0);
  EXPECT_EQ(agent.soft_target(b, Eigen::MatrixXd::Zero(kActionDim, 8)), b.reward);
}

TEST(Sac, SoftTargetIncludesEntropyBonus) {
  std::mt19937_64 rng(8);
  const SacAgent agent(17, small_sac(), 2);
  const Batch b = random_batch(17, 4, rng, 0.0);
  const Eigen::MatrixXd noise = Eigen::MatrixXd::Constant(kActionDim, 4, 0.3);
  const Eigen::RowVectorXd y = agent.soft_target(b, noise);
  for (int k = 0; k < 4; ++k) {
    const SquashedSample s = squash_sample(agent.head(b.next_obs.col(k)), noise.col(k));
    Eigen::VectorXd sa(21);
    sa.head(17) = b.next_obs.col(k);
    sa.tail(4) = s.action;
    const double q = std::min(agent.critic1_target().forward(sa)(0, 0),
                              agent.critic2_target().forward(sa)(0, 0));
    EXPECT_NEAR(y(k), b.reward(k) + 0.99 * (q - agent.alpha() * s.log_prob), 1e-12);
  }
}

TEST(Sac, TemperatureGradient) {
  // -mean(log pi + target): entropy above the target lowers alpha.
  Eigen::RowVectorXd lp(2);
  lp << 1.0, 3.0;
  EXPECT_DOUBLE_EQ(SacAgent::temperature_gradient(lp, -4.0), 2.0);
  lp << 4.0, 4.0;
  EXPECT_DOUBLE_EQ(SacAgent::temperature_gradient(lp, -4.0), 0.0);
}

TEST(Sac, TemperatureFollowsEntropy) {
  std::mt19937_64 rng(9);
  SacAgent agent(17, small_sac(), 4);
  const Batch b = random_batch(17, 16, rng, 0.0);
  const double a0 = agent.alpha();
  const UpdateStats s = agent.update_on_batch(b);
  // A fresh actor has std ~ 1 per dimension: entropy well above -4.
  EXPECT_GT(s.entropy, -4.0);
  EXPECT_LT(agent.alpha(), a0);
  EXPECT_DOUBLE_EQ(s.alpha, agent.alpha());
}

TEST(Sac, DeterministicActionIsTanhOfMean) {
  const SacAgent agent(17, small_sac(), 5);
  const Eigen::VectorXd obs = Eigen::VectorXd::Constant(17, 0.2);
  const Eigen::VectorXd out = agent.actor().forward(obs);
  EXPECT_LT((agent.act(obs).u - out.head(4).array().tanh().matrix()).norm(), 1e-15);
}

TEST(Configs, Validation) {
  Td3Config t;
  EXPECT_NO_THROW(t.validate());
  t.gamma = 1.0;
  EXPECT_THROW(t.validate(), PreconditionError);
  t = Td3Config{};
  t.buffer_capacity = 10;
  EXPECT_THROW(t.validate(), PreconditionError);
  SacConfig s;
  s.initial_alpha = 0.0;
  EXPECT_THROW(s.validate(), PreconditionError);
}

TEST(Configs, ParseTags) {
  EXPECT_EQ(parse_mode("baseline"), AgentMode::baseline);
  EXPECT_EQ(parse_algorithm("sac"), Algorithm::sac);
  EXPECT_THROW(parse_mode("equi"), std::invalid_argument);
  EXPECT_EQ(to_string(Algorithm::td3), "td3");
}

}  // namespace
}  // namespace eqrl

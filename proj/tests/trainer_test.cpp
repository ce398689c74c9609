#include <set>

#include <gtest/gtest.h>

#include "eqrl/trainer.hpp"

namespace eqrl {
namespace {

TEST(Trainer, HoverFromTheGoalStaysThere) {
  const QuadrotorParams p;
  EnvConfig cfg;
  QuadrotorEnv env(cfg, p);
  State s;
  s.x = cfg.x_d;
  env.reset_to(s);
  const PolicyFn hover = hover_policy(p);
  double ret = 0.0;
  StepResult r;
  do {
    r = env.step(hover(env.state()));
    ret += r.reward;
  } while (!r.done);
  EXPECT_EQ(r.done_reason, DoneReason::horizon);
  EXPECT_LT((env.state().x - cfg.x_d).norm(), 1e-12);
  EXPECT_NEAR(ret, cfg.max_steps * cfg.reward_scale, 1e-9);
}

TEST(Trainer, HoverActorCommandsHover) {
  const QuadrotorParams p;
  std::mt19937_64 rng(3);
  for (AgentMode mode : {AgentMode::baseline, AgentMode::equivariant}) {
    const Mlp actor = make_hover_actor(mode, p, 16);
    EXPECT_EQ(snapshot_mode(actor), mode);
    const PolicyFn pi = actor_policy(actor, mode, EnvConfig{});
    for (int i = 0; i < 5; ++i) {
      State s;
      s.x = Vec3::Random() * 2.0;
      s.v = Vec3::Random();
      const Action a = thrusts_from_actor(pi(s), p);
      EXPECT_LT((a.thrust - hover_action(p).thrust).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Trainer, SnapshotModeRejectsOtherWidths) {
  std::mt19937_64 rng(0);
  EXPECT_THROW(snapshot_mode(make_actor(5, 8, 4, Activation::tanh, rng)), std::invalid_argument);
}

TEST(Trainer, EvaluationIsSeededAndCountsEpisodes) {
  const QuadrotorParams p;
  const EnvConfig cfg;
  const EvalResult a = evaluate(hover_policy(p), cfg, p, 4, 11);
  const EvalResult b = evaluate(hover_policy(p), cfg, p, 4, 11);
  ASSERT_EQ(a.returns.size(), 4u);
  EXPECT_EQ(a.returns, b.returns);
  EXPECT_EQ(a.episodes, 4);
  for (double r : a.returns) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, cfg.max_steps * cfg.reward_scale);
  }
}

TEST(Trainer, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    for (Stream st : {Stream::environment, Stream::agent, Stream::warmup, Stream::evaluation,
                      Stream::final_check}) {
      seen.insert(derive_seed(seed, st));
    }
  }
  EXPECT_EQ(seen.size(), 15u);
}

TrainConfig smoke(Algorithm algo) {
  TrainConfig c;
  c.algo = algo;
  c.total_steps = 600;
  c.eval_interval = 200;
  c.eval_episodes = 2;
  c.env.max_steps = 100;
  c.td3.hidden_units = c.sac.hidden_units = 32;
  c.td3.batch_size = c.sac.batch_size = 32;
  c.td3.warmup_steps = c.sac.warmup_steps = 100;
  return c;
}

TEST(Trainer, SmokeRunIsDeterministic) {
  for (Algorithm algo : {Algorithm::td3, Algorithm::sac}) {
    const TrainConfig c = smoke(algo);
    std::vector<std::int64_t> checkpoints;
    const TrainResult a =
        train(c, 300, [&](std::int64_t step, const Mlp&) { checkpoints.push_back(step); });
    const TrainResult b = train(c);
    EXPECT_EQ(checkpoints, (std::vector<std::int64_t>{300, 600}));
    ASSERT_EQ(a.log.rows.size(), 3u);
    for (std::size_t i = 0; i < a.log.rows.size(); ++i) {
      EXPECT_EQ(a.log.rows[i].env_step, static_cast<std::int64_t>(200 * (i + 1)));
      EXPECT_EQ(a.log.rows[i].mean_return, b.log.rows[i].mean_return);
      EXPECT_EQ(a.log.rows[i].mean_terminal_error, b.log.rows[i].mean_terminal_error);
    }
    EXPECT_TRUE(a.final_actor == b.final_actor);
    EXPECT_GE(a.episodes, 6);
  }
}

TEST(Trainer, RejectsBadConfig) {
  TrainConfig c = smoke(Algorithm::td3);
  c.eval_interval = 0;
  EXPECT_THROW(train(c), PreconditionError);
}

}  // namespace
}  // namespace eqrl

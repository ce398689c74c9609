#include <sstream>

#include <gtest/gtest.h>

#include "eqrl/compare.hpp"

namespace eqrl {
namespace {

TrainingLog curve(AgentMode mode, std::uint64_t seed, const std::vector<double>& returns,
                  std::int64_t interval = 10000) {
  TrainingLog log;
  log.algo = Algorithm::td3;
  log.mode = mode;
  log.seed = seed;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    EvalRow r;
    r.env_step = static_cast<std::int64_t>(i + 1) * interval;
    r.mean_return = returns[i];
    log.rows.push_back(r);
  }
  return log;
}

TEST(Compare, IdenticalLogsGiveNoImprovement) {
  const std::vector<double> r{1, 5, 9, 10, 10};
  const auto s = compare_modes({curve(AgentMode::baseline, 0, r), curve(AgentMode::baseline, 1, r)},
                               {curve(AgentMode::equivariant, 0, r), curve(AgentMode::equivariant, 1, r)});
  ASSERT_TRUE(s.baseline.steps_to_threshold && s.equivariant.steps_to_threshold);
  EXPECT_EQ(*s.baseline.steps_to_threshold, *s.equivariant.steps_to_threshold);
  EXPECT_EQ(*s.equivariant.steps_to_threshold, 30000);  // 9 >= 0.8 * 10
  EXPECT_FALSE(s.improved);
  EXPECT_DOUBLE_EQ(*s.speedup, 1.0);
}

TEST(Compare, HandBuiltTwofoldSpeedup) {
  // Best mean 10; threshold 8. Equivariant crosses at 40k, baseline at 80k.
  const std::vector<double> eq{1, 2, 5, 8.5, 9, 10, 10, 10};
  const std::vector<double> base{0, 1, 2, 3, 5, 6, 7, 8};
  const auto s = compare_modes({curve(AgentMode::baseline, 0, base)},
                               {curve(AgentMode::equivariant, 0, eq)});
  EXPECT_DOUBLE_EQ(s.threshold, 8.0);
  EXPECT_EQ(*s.equivariant.steps_to_threshold, 40000);
  EXPECT_EQ(*s.baseline.steps_to_threshold, 80000);
  EXPECT_TRUE(s.improved);
  EXPECT_DOUBLE_EQ(*s.speedup, 2.0);
}

TEST(Compare, BandIsTwoSampleStd) {
  const auto m = aggregate_mode({curve(AgentMode::baseline, 0, {1.0, 4.0}),
                                 curve(AgentMode::baseline, 1, {3.0, 4.0}),
                                 curve(AgentMode::baseline, 2, {5.0, 4.0})});
  ASSERT_EQ(m.curve.size(), 2u);
  EXPECT_DOUBLE_EQ(m.curve[0].mean, 3.0);
  EXPECT_DOUBLE_EQ(m.curve[0].two_sigma, 4.0);  // sample std of {1, 3, 5} is 2
  EXPECT_DOUBLE_EQ(m.curve[1].two_sigma, 0.0);
  EXPECT_DOUBLE_EQ(m.final_std, 0.0);
}

TEST(Compare, BandsOnlyWhereAllSeedsReport) {
  const auto m = aggregate_mode({curve(AgentMode::baseline, 0, {1.0, 2.0, 3.0}),
                                 curve(AgentMode::baseline, 1, {1.0, 2.0})});
  ASSERT_EQ(m.curve.size(), 2u);
  EXPECT_EQ(m.curve.back().step, 20000);
}

TEST(Compare, NeverReachingTheThreshold) {
  const auto s = compare_modes({curve(AgentMode::baseline, 0, {1, 2, 3})},
                               {curve(AgentMode::equivariant, 0, {5, 10, 10})});
  EXPECT_FALSE(s.baseline.steps_to_threshold.has_value());
  EXPECT_TRUE(s.improved);
  EXPECT_FALSE(s.speedup.has_value());
}

TEST(Compare, PooledStd) {
  const auto s = compare_modes(
      {curve(AgentMode::baseline, 0, {1.0}), curve(AgentMode::baseline, 1, {3.0})},
      {curve(AgentMode::equivariant, 0, {2.0}), curve(AgentMode::equivariant, 1, {2.0})});
  EXPECT_NEAR(s.pooled_final_std, std::sqrt(0.5 * 2.0), 1e-15);
}

TEST(Compare, MisalignedLogsAreErrors) {
  EXPECT_THROW(aggregate_mode({}), std::runtime_error);
  EXPECT_THROW(aggregate_mode({curve(AgentMode::baseline, 0, {1.0}, 10000),
                               curve(AgentMode::baseline, 1, {1.0}, 5000)}),
               std::runtime_error);
  EXPECT_THROW(aggregate_mode({curve(AgentMode::baseline, 0, {1.0}),
                               curve(AgentMode::equivariant, 1, {1.0})}),
               std::runtime_error);
  EXPECT_THROW(compare_modes({curve(AgentMode::equivariant, 0, {1.0})},
                             {curve(AgentMode::equivariant, 0, {1.0})}),
               std::runtime_error);
}

TEST(Compare, CsvLayout) {
  const auto s = compare_modes({curve(AgentMode::baseline, 0, {1.0, 2.0})},
                               {curve(AgentMode::equivariant, 0, {2.0, 4.0})});
  std::ostringstream os;
  write_comparison_csv(os, s);
  EXPECT_EQ(os.str(),
            "step,mode,mean,two_sigma\n"
            "10000,baseline,1,0\n20000,baseline,2,0\n"
            "10000,equivariant,2,0\n20000,equivariant,4,0\n");
}

TEST(Compare, ArtifactNames) {
  EXPECT_EQ(training_log_path("out", Algorithm::sac, AgentMode::baseline, 3),
            "out/sac_baseline_seed3.csv");
  EXPECT_EQ(policy_path("out", Algorithm::td3, AgentMode::equivariant, 0, "best"),
            "out/td3_equivariant_seed0_best.policy");
}

}  // namespace
}  // namespace eqrl

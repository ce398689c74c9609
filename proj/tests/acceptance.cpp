// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
//
// Learning criteria (8, 9) need full-length runs. They are read from --runs
// when complete logs and snapshots are present there (for example produced
// earlier by `eqrl train` with the default configuration), otherwise trained
// in-process and written to the same place.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eqrl/compare.hpp"
#include "eqrl/config.hpp"
#include "eqrl/csv.hpp"
#include "eqrl/runtime.hpp"
#include "eqrl/verify.hpp"

namespace fs = std::filesystem;
using namespace eqrl;

namespace {

constexpr std::uint64_t kSeed = 20240611;

constexpr int kEquivarianceCases = 1000;
constexpr int kRolloutCases = 100;
constexpr int kRolloutSteps = 100;
constexpr double kStepTol = 1e-10;
constexpr double kRolloutTol = 1e-8;
constexpr int kRewardCases = 1000;
constexpr double kRewardTol = 1e-12;
constexpr int kQuotientCases = 1000;
constexpr double kQuotientTol = 1e-10;
constexpr int kNetworkCases = 500;
constexpr double kNetworkTol = 1e-10;
constexpr int kGradientDraws = 100;
constexpr double kGradientTol = 1e-5;
constexpr double kRk4Low = 12.0;
constexpr double kRk4High = 20.0;
constexpr int kMixerCases = 1000;
constexpr double kMixerTol = 1e-12;

const std::vector<std::uint64_t> kLearningSeeds{0, 1, 2};
constexpr std::int64_t kTd3Steps = 100'000;
constexpr std::int64_t kSacSteps = 50'000;
constexpr double kThresholdFraction = 0.8;
constexpr double kTerminalErrorBound = 0.1;  // m
constexpr int kFinalEpisodes = 10;
constexpr std::int64_t kDeterminismSteps = 5'000;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void dynamics_equivariance() {
  const QuadrotorParams p;
  std::mt19937_64 rng(kSeed + 1);
  const double step = equivariance_step_error(rng, kEquivarianceCases, p, EnvConfig{}.dt);
  const double roll =
      equivariance_rollout_error(rng, kRolloutCases, kRolloutSteps, p, EnvConfig{}.dt);
  report(1, "dynamics-equivariance", step <= kStepTol && roll <= kRolloutTol,
         fmt("step %.3e <= %.0e, 100-step rollout %.3e <= %.0e", step, kStepTol, roll,
             kRolloutTol));
}

void reward_invariance() {
  std::mt19937_64 rng(kSeed + 2);
  const double e = reward_invariance_error(rng, kRewardCases, EnvConfig{}, QuadrotorParams{});
  report(2, "reward-invariance", e <= kRewardTol, fmt("%.3e <= %.0e", e, kRewardTol));
}

void quotient() {
  std::mt19937_64 rng(kSeed + 3);
  const QuotientErrors q = quotient_errors(rng, kQuotientCases);
  report(3, "quotient", q.reduced <= kQuotientTol && q.rotated_x2 <= kQuotientTol,
         fmt("reduced %.3e, rotated x2 %.3e <= %.0e", q.reduced, q.rotated_x2, kQuotientTol));
}

void network_invariance() {
  std::mt19937_64 rng(kSeed + 4);
  const double e = network_invariance_error(rng, kNetworkCases, EnvConfig{}, QuadrotorParams{});
  report(4, "network-invariance", e <= kNetworkTol, fmt("%.3e <= %.0e", e, kNetworkTol));
}

void gradients() {
  std::mt19937_64 rng(kSeed + 5);
  double worst = 0.0;
  for (AgentMode mode : {AgentMode::equivariant, AgentMode::baseline}) {
    worst = std::max(worst, gradient_check(rng, kGradientDraws, obs_dim(mode)).worst_relative);
  }
  report(5, "gradient-check", worst < kGradientTol,
         fmt("max relative error %.3e < %.0e", worst, kGradientTol));
}

void rk4_order() {
  const Rk4OrderStudy st = rk4_order_study(QuadrotorParams{});
  bool ok = st.ratios.size() == 3;
  std::string ratios;
  for (double r : st.ratios) {
    ok = ok && r >= kRk4Low && r <= kRk4High;
    ratios += fmt(" %.2f", r);
  }
  report(6, "rk4-order", ok,
         "error ratios per halving" + ratios + fmt(" in [%.0f, %.0f]", kRk4Low, kRk4High));
}

void mixer() {
  std::mt19937_64 rng(kSeed + 7);
  const double e = mixer_roundtrip_error(rng, kMixerCases, QuadrotorParams{});
  report(7, "mixer-roundtrip", e <= kMixerTol, fmt("%.3e <= %.0e", e, kMixerTol));
}

// A run counts as complete when its log reaches the requested length and its
// best snapshot exists.
bool complete(const std::string& dir, Algorithm algo, AgentMode mode, std::uint64_t seed,
              std::int64_t steps) {
  const std::string log = training_log_path(dir, algo, mode, seed);
  if (!fs::exists(log) || !fs::exists(policy_path(dir, algo, mode, seed, "best"))) return false;
  try {
    const TrainingLog l = read_training_log(log);
    return !l.rows.empty() && l.rows.back().env_step == steps && l.algo == algo && l.mode == mode;
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<TrainingLog> obtain_runs(const std::string& dir, Algorithm algo, AgentMode mode,
                                     std::int64_t steps) {
  std::vector<TrainingLog> logs;
  for (std::uint64_t seed : kLearningSeeds) {
    if (!complete(dir, algo, mode, seed, steps)) {
      std::printf("       training %s %s seed %llu for %lld steps\n",
                  std::string(to_string(algo)).c_str(), std::string(to_string(mode)).c_str(),
                  static_cast<unsigned long long>(seed), static_cast<long long>(steps));
      std::fflush(stdout);
      RunConfig cfg;
      cfg.algo = algo;
      cfg.mode = mode;
      cfg.total_steps = steps;
      const TrainResult r = train(cfg.train_config(seed));
      write_training_log(training_log_path(dir, algo, mode, seed), r.log);
      r.final_actor.save_file(policy_path(dir, algo, mode, seed, "final"));
      r.best_actor.save_file(policy_path(dir, algo, mode, seed, "best"));
    }
    logs.push_back(read_training_log(training_log_path(dir, algo, mode, seed)));
  }
  return logs;
}

void learning(int id, const std::string& dir, Algorithm algo, std::int64_t steps) {
  const auto base = obtain_runs(dir, algo, AgentMode::baseline, steps);
  const auto eqv = obtain_runs(dir, algo, AgentMode::equivariant, steps);
  const ComparisonSummary s = compare_modes(base, eqv, kThresholdFraction);
  const auto& be = s.baseline.steps_to_threshold;
  const auto& ee = s.equivariant.steps_to_threshold;
  const bool faster = ee && (!be || *ee <= *be);
  const bool final_ok = s.equivariant.final_mean >= s.baseline.final_mean - s.pooled_final_std;
  auto steps_str = [](const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string("never");
  };
  std::ostringstream d;
  d << "steps to " << kThresholdFraction << " x best (" << s.threshold << "): equivariant "
    << steps_str(ee) << " vs baseline " << steps_str(be) << "; final mean " << s.equivariant.final_mean
    << " vs " << s.baseline.final_mean << " - pooled std " << s.pooled_final_std;
  report(id, std::string(to_string(algo)) + "-sample-efficiency", faster && final_ok, d.str());
}

void final_position(const std::string& dir) {
  // Best equivariant TD3 policy across seeds, ranked by its best evaluation.
  std::uint64_t best_seed = kLearningSeeds.front();
  double best = -1.0;
  for (std::uint64_t seed : kLearningSeeds) {
    const TrainingLog l =
        read_training_log(training_log_path(dir, Algorithm::td3, AgentMode::equivariant, seed));
    for (const EvalRow& r : l.rows) {
      if (r.mean_return > best) {
        best = r.mean_return;
        best_seed = seed;
      }
    }
  }
  const Mlp actor = Mlp::load_file(
      policy_path(dir, Algorithm::td3, AgentMode::equivariant, best_seed, "best"));
  const EnvConfig env;
  const EvalResult e = evaluate(actor_policy(actor, AgentMode::equivariant, env), env,
                                QuadrotorParams{}, kFinalEpisodes,
                                derive_seed(best_seed, Stream::final_check));
  const bool ok = e.mean_terminal_error < kTerminalErrorBound && e.position_bound_terminations == 0;
  report(9, "final-position", ok,
         fmt("seed %.0f: mean terminal error %.4f m (bound < %.1f m), position-bound terminations %.0f (bound 0)",
             static_cast<double>(best_seed), e.mean_terminal_error, kTerminalErrorBound,
             e.position_bound_terminations));
}

std::string log_without_wall_time(const TrainingLog& log) {
  std::ostringstream os;
  write_training_log(os, log);
  std::istringstream is(os.str());
  std::string line, out;
  while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

void determinism() {
  RunConfig cfg;
  cfg.total_steps = kDeterminismSteps;
  const TrainConfig tc = cfg.train_config(0);
  const TrainResult a = train(tc);
  const TrainResult b = train(tc);
  std::ostringstream pa, pb;
  a.final_actor.save(pa);
  b.final_actor.save(pb);
  const bool logs = log_without_wall_time(a.log) == log_without_wall_time(b.log);
  const bool weights = pa.str() == pb.str();
  report(10, "determinism", logs && weights,
         std::string("5000-step logs ") + (logs ? "identical" : "differ") + ", final actor bytes " +
             (weights ? "identical" : "differ"));
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  CLI::App app{"Acceptance suite"};
  std::string runs = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--runs", runs, "Directory holding (or receiving) the learning runs");
  app.add_option("--only", only, "Run just these criteria (e.g. --only 1 2 10)");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> pick(only.begin(), only.end());
  auto wanted = [&](int id) { return pick.empty() || pick.count(id) > 0; };
  fs::create_directories(runs);

  try {
    if (wanted(1)) dynamics_equivariance();
    if (wanted(2)) reward_invariance();
    if (wanted(3)) quotient();
    if (wanted(4)) network_invariance();
    if (wanted(5)) gradients();
    if (wanted(6)) rk4_order();
    if (wanted(7)) mixer();
    if (wanted(10)) determinism();
    if (wanted(8)) {
      learning(8, runs, Algorithm::td3, kTd3Steps);
      learning(8, runs, Algorithm::sac, kSacSteps);
    }
    if (wanted(9)) {
      obtain_runs(runs, Algorithm::td3, AgentMode::equivariant, kTd3Steps);
      final_position(runs);
    }
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s\n", failures == 0 ? "acceptance: all criteria pass"
                                    : ("acceptance: " + std::to_string(failures) + " failed").c_str());
  return failures == 0 ? 0 : 1;
}

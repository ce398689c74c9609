// eqrl: train, compare, verify and replay from the command line.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <utility>
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

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoImprovement = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> seeds;
  std::optional<std::int64_t> steps;
  std::optional<std::string> algo;
  std::optional<std::string> mode;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_mode) {
  cmd->add_option("--config", o.config, "Run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory (overrides out_dir)");
  cmd->add_option("--seeds", o.seeds, "Comma-separated seed list (overrides seeds)");
  cmd->add_option("--steps", o.steps, "Environment steps per seed (overrides total_steps)");
  cmd->add_option("--algo", o.algo, "td3 or sac")->check(CLI::IsMember({"td3", "sac"}));
  if (with_mode) {
    cmd->add_option("--mode", o.mode, "baseline or equivariant")
        ->check(CLI::IsMember({"baseline", "equivariant"}));
  }
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.out) cfg.out_dir = *o.out;
  if (o.seeds) cfg.seeds = parse_seed_list(*o.seeds);
  if (o.steps) cfg.total_steps = *o.steps;
  if (o.algo) cfg.algo = parse_algorithm(*o.algo);
  if (o.mode) cfg.mode = parse_mode(*o.mode);
  cfg.validate();
  return cfg;
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<TrainResult> result;
  std::vector<std::pair<std::int64_t, Mlp>> checkpoints;
  std::string error;
};

SeedOutcome train_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedOutcome out;
  out.seed = seed;
  try {
    out.result = train(cfg.train_config(seed), cfg.checkpoint_interval,
                       [&out](std::int64_t step, const Mlp& actor) {
                         out.checkpoints.emplace_back(step, actor);
                       });
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

// Single writer for every artifact of a seed.
bool write_outcome(const RunConfig& cfg, const SeedOutcome& o) {
  const std::string& dir = cfg.out_dir;
  for (const auto& [step, actor] : o.checkpoints) {
    actor.save_file(policy_path(dir, cfg.algo, cfg.mode, o.seed, "step" + std::to_string(step)));
  }
  if (!o.result) {
    std::cerr << "seed " << o.seed << ": training failed: " << o.error << '\n';
    return false;
  }
  const TrainResult& r = *o.result;
  write_training_log(training_log_path(dir, cfg.algo, cfg.mode, o.seed), r.log);
  r.final_actor.save_file(policy_path(dir, cfg.algo, cfg.mode, o.seed, "final"));
  r.best_actor.save_file(policy_path(dir, cfg.algo, cfg.mode, o.seed, "best"));

  std::printf("seed %llu: %s %s, %lld steps, %lld episodes",
              static_cast<unsigned long long>(o.seed), std::string(to_string(cfg.algo)).c_str(),
              std::string(to_string(cfg.mode)).c_str(), static_cast<long long>(cfg.total_steps),
              static_cast<long long>(r.episodes));
  if (!r.log.rows.empty()) {
    const EvalRow& last = r.log.rows.back();
    std::printf(", final return %.4f +- %.4f, best %.4f, terminal error %.4f m, %.1f s",
                last.mean_return, last.std_return, r.best_eval_return, last.mean_terminal_error,
                last.wall_time_s);
  }
  std::printf("\n");
  std::fflush(stdout);
  return true;
}

int cmd_train(const CommonOptions& o) {
  const RunConfig cfg = resolve(o);
  fs::create_directories(cfg.out_dir);
  bool ok = true;
  const std::size_t jobs = static_cast<std::size_t>(cfg.jobs);
  for (std::size_t first = 0; first < cfg.seeds.size(); first += jobs) {
    const std::size_t last = std::min(cfg.seeds.size(), first + jobs);
    std::vector<SeedOutcome> outcomes;
    if (jobs == 1) {
      outcomes.push_back(train_seed(cfg, cfg.seeds[first]));
    } else {
      std::vector<std::future<SeedOutcome>> workers;
      for (std::size_t i = first; i < last; ++i) {
        workers.push_back(std::async(std::launch::async, train_seed, std::cref(cfg), cfg.seeds[i]));
      }
      for (auto& w : workers) outcomes.push_back(w.get());
    }
    for (const auto& out : outcomes) ok = write_outcome(cfg, out) && ok;
  }
  return ok ? kExitOk : kExitError;
}

int cmd_compare(const CommonOptions& o) {
  const RunConfig cfg = resolve(o);
  std::vector<TrainingLog> base, eqv;
  for (std::uint64_t seed : cfg.seeds) {
    base.push_back(read_training_log(training_log_path(cfg.out_dir, cfg.algo, AgentMode::baseline, seed)));
    eqv.push_back(read_training_log(training_log_path(cfg.out_dir, cfg.algo, AgentMode::equivariant, seed)));
  }
  const ComparisonSummary s = compare_modes(base, eqv, cfg.threshold_fraction);
  const std::string csv = cfg.out_dir + "/" + std::string(to_string(cfg.algo)) + "_comparison.csv";
  std::ofstream os(csv);
  if (!os) throw std::runtime_error("cannot write " + csv);
  write_comparison_csv(os, s);
  print_comparison(std::cout, s);
  std::cout << "wrote " << csv << '\n';
  return s.improved ? kExitOk : kExitNoImprovement;
}

int cmd_verify(std::optional<std::uint64_t> seed_opt, const std::string& fault_name) {
  const Fault fault = parse_fault(fault_name);
  const std::uint64_t seed =
      seed_opt ? *seed_opt : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  std::printf("property battery, seed %llu", static_cast<unsigned long long>(seed));
  if (fault != Fault::none) std::printf(", injected fault: %s", std::string(to_string(fault)).c_str());
  std::printf("\n");
  std::vector<std::string> failed;
  for (const PropertyResult& r : run_property_battery(seed, fault)) {
    std::printf("%s  %-30s worst %.3e  (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.observed, r.bound.c_str());
    if (!r.passed) failed.push_back(r.name);
  }
  if (failed.empty()) {
    std::printf("all properties pass\n");
    return kExitOk;
  }
  std::printf("failed:");
  for (const auto& f : failed) std::printf(" %s", f.c_str());
  std::printf("\n");
  return kExitError;
}

struct ReplayOptions {
  std::string policy;
  int episodes = 1;
  std::uint64_t seed = 0;
  std::string start = "random";
};

int cmd_replay(const CommonOptions& o, const ReplayOptions& ro) {
  const RunConfig cfg = resolve(o);
  const Mlp actor = Mlp::load_file(ro.policy);
  const AgentMode mode = snapshot_mode(actor);
  const PolicyFn policy = actor_policy(actor, mode, cfg.env);

  fs::create_directories(cfg.out_dir);
  const std::string csv = cfg.out_dir + "/replay_" + fs::path(ro.policy).stem().string() + ".csv";
  std::ofstream os(csv);
  if (!os) throw std::runtime_error("cannot write " + csv);
  os << kTrajectoryHeader << '\n';

  EnvConfig env_cfg = cfg.env;
  env_cfg.seed = ro.seed;
  QuadrotorEnv env(env_cfg, cfg.params);
  for (int ep = 0; ep < ro.episodes; ++ep) {
    if (ro.start == "goal") {
      State s;
      s.x = cfg.env.x_d;
      env.reset_to(s);
    } else {
      env.reset();
    }
    StepResult r;
    do {
      const State s = env.state();
      const double t = env.steps() * cfg.env.dt;
      r = env.step(policy(s));
      write_trajectory_row(os, ep, t, s, r);
    } while (!r.done);
    const Vec3 x = env.state().x;
    std::printf("episode %d: terminal position (%.4f, %.4f, %.4f) m, |x - x_d| = %.4f m, %s\n", ep,
                x.x(), x.y(), x.z(), (x - cfg.env.x_d).norm(),
                std::string(to_string(r.done_reason)).c_str());
  }
  std::cout << "wrote " << csv << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  CLI::App app{"S1-equivariant quadrotor reinforcement learning workbench"};
  app.require_subcommand(1);

  CommonOptions train_o, compare_o, replay_o;
  auto* train_cmd = app.add_subcommand("train", "Train one agent per seed and write logs and snapshots");
  add_common(train_cmd, train_o, true);

  auto* compare_cmd = app.add_subcommand(
      "compare", "Aggregate baseline and equivariant logs; exit 0 if equivariant learns faster, 2 if not");
  add_common(compare_cmd, compare_o, false);

  auto* verify_cmd = app.add_subcommand("verify", "Run the symmetry and numerics property battery");
  std::optional<std::uint64_t> verify_seed;
  std::string fault = "none";
  verify_cmd->add_option("--seed", verify_seed, "Seed for the random cases (default: fresh)");
  verify_cmd->add_option("--inject-fault", fault, "none, attitude-sign or theta-sign")
      ->check(CLI::IsMember({"none", "attitude-sign", "theta-sign"}));

  auto* replay_cmd = app.add_subcommand("replay", "Roll out a policy snapshot and write its trajectory");
  add_common(replay_cmd, replay_o, false);
  ReplayOptions ro;
  replay_cmd->add_option("--policy", ro.policy, "Actor snapshot")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--episodes", ro.episodes, "Number of episodes")->check(CLI::PositiveNumber);
  replay_cmd->add_option("--seed", ro.seed, "Seed of the initial-state draws");
  replay_cmd->add_option("--start", ro.start, "random or goal (at rest at x_d)")
      ->check(CLI::IsMember({"random", "goal"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(train_o);
    if (compare_cmd->parsed()) return cmd_compare(compare_o);
    if (verify_cmd->parsed()) return cmd_verify(verify_seed, fault);
    if (replay_cmd->parsed()) return cmd_replay(replay_o, ro);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

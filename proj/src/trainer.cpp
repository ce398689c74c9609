#include "eqrl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

#include "eqrl/errors.hpp"

namespace eqrl {

std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  // splitmix64 finalizer over (seed, stream).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EvalResult evaluate(const PolicyFn& policy, const EnvConfig& env, const QuadrotorParams& params,
                    int n_episodes, std::uint64_t seed) {
  EnvConfig cfg = env;
  cfg.seed = seed;
  QuadrotorEnv sim(cfg, params);
  EvalResult out;
  out.episodes = n_episodes;
  for (int ep = 0; ep < n_episodes; ++ep) {
    sim.reset();
    double ret = 0.0;
    StepResult r;
    do {
      r = sim.step(policy(sim.state()));
      ret += r.reward;
    } while (!r.done);
    if (r.done_reason == DoneReason::position_bound) ++out.position_bound_terminations;
    out.returns.push_back(ret);
    out.terminal_errors.push_back(sim.state().x - cfg.x_d);
  }
  if (n_episodes > 0) {
    double sum = 0.0, err = 0.0;
    for (int i = 0; i < n_episodes; ++i) {
      sum += out.returns[i];
      err += out.terminal_errors[i].norm();
    }
    out.mean_return = sum / n_episodes;
    out.mean_terminal_error = err / n_episodes;
    double var = 0.0;
    for (double r : out.returns) var += (r - out.mean_return) * (r - out.mean_return);
    out.std_return = std::sqrt(var / n_episodes);
  }
  return out;
}

PolicyFn actor_policy(Mlp actor, AgentMode mode, const EnvConfig& env) {
  if (actor.input_dim() != obs_dim(mode)) {
    throw std::invalid_argument("actor_policy: actor input width does not match the mode encoding");
  }
  return [actor = std::move(actor), mode, env](const State& s) {
    return deterministic_action(actor, encode(s, mode, env));
  };
}

PolicyFn hover_policy(const QuadrotorParams& params) {
  const Action hover = inverse_mixer(Wrench{params.mass * params.gravity, Vec3::Zero()}, params);
  const ActorOutput u = actor_from_thrusts(hover, params);
  return [u](const State&) { return u; };
}

Mlp make_hover_actor(AgentMode mode, const QuadrotorParams& params, int hidden) {
  Mlp net({obs_dim(mode), hidden, hidden, kActionDim},
          {Activation::relu, Activation::relu, Activation::tanh});
  const ActorOutput u = hover_policy(params)(State{});
  auto& last = net.mutable_layers().back();
  for (int i = 0; i < kActionDim; ++i) last.bias(i) = std::atanh(u.u(i));
  return net;
}

AgentMode snapshot_mode(const Mlp& actor) {
  if (actor.output_dim() != kActionDim && actor.output_dim() != 2 * kActionDim) {
    throw std::invalid_argument("snapshot has " + std::to_string(actor.output_dim()) +
                                " outputs; expected 4 (TD3) or 8 (SAC)");
  }
  if (actor.input_dim() == obs_dim(AgentMode::equivariant)) return AgentMode::equivariant;
  if (actor.input_dim() == obs_dim(AgentMode::baseline)) return AgentMode::baseline;
  throw std::invalid_argument("snapshot has input width " + std::to_string(actor.input_dim()) +
                              "; expected 17 (equivariant) or 18 (baseline)");
}

void TrainConfig::validate() const {
  if (total_steps < 0) throw PreconditionError("TrainConfig: total_steps must be non-negative");
  if (eval_interval < 1) throw PreconditionError("TrainConfig: eval_interval must be positive");
  if (eval_episodes < 1) throw PreconditionError("TrainConfig: eval_episodes must be positive");
  env.validate();
  params.validate();
  if (algo == Algorithm::td3) td3.validate(); else sac.validate();
}

namespace {

// Thin dispatch so the loop below is shared by both algorithms.
struct Learner {
  std::variant<Td3Agent, SacAgent> agent;
  std::int64_t warmup;

  ActorOutput explore(const Eigen::VectorXd& obs) {
    return std::visit([&](auto& a) { return a.explore(obs); }, agent);
  }
  void update(const ReplayBuffer& buf) {
    std::visit([&](auto& a) { a.update(buf); }, agent);
  }
  const Mlp& actor() const {
    return std::visit([](const auto& a) -> const Mlp& { return a.actor(); }, agent);
  }
};

Learner make_learner(const TrainConfig& cfg) {
  const std::uint64_t seed = derive_seed(cfg.seed, Stream::agent);
  const int dim = obs_dim(cfg.mode);
  if (cfg.algo == Algorithm::td3) {
    return Learner{std::variant<Td3Agent, SacAgent>(std::in_place_type<Td3Agent>, dim, cfg.td3, seed),
                   cfg.td3.warmup_steps};
  }
  return Learner{std::variant<Td3Agent, SacAgent>(std::in_place_type<SacAgent>, dim, cfg.sac, seed),
                 cfg.sac.warmup_steps};
}

}  // namespace

TrainResult train(const TrainConfig& cfg, std::int64_t checkpoint_interval,
                  const CheckpointFn& on_checkpoint) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Learner learner = make_learner(cfg);
  const std::size_t capacity =
      cfg.algo == Algorithm::td3 ? cfg.td3.buffer_capacity : cfg.sac.buffer_capacity;
  const std::int64_t batch = cfg.algo == Algorithm::td3 ? cfg.td3.batch_size : cfg.sac.batch_size;
  ReplayBuffer buffer(obs_dim(cfg.mode), capacity);

  EnvConfig env_cfg = cfg.env;
  env_cfg.seed = derive_seed(cfg.seed, Stream::environment);
  QuadrotorEnv env(env_cfg, cfg.params);
  std::mt19937_64 warmup_rng(derive_seed(cfg.seed, Stream::warmup));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const std::uint64_t eval_seed = derive_seed(cfg.seed, Stream::evaluation);

  TrainResult result;
  result.log.algo = cfg.algo;
  result.log.mode = cfg.mode;
  result.log.seed = cfg.seed;
  result.best_eval_return = -std::numeric_limits<double>::infinity();

  env.reset();
  Eigen::VectorXd obs = encode(env.state(), cfg.mode, cfg.env);
  for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
    ActorOutput u;
    if (t < learner.warmup) {
      for (int i = 0; i < kActionDim; ++i) u.u(i) = uniform(warmup_rng);
    } else {
      u = learner.explore(obs);
    }
    const Action prev = env.steps() == 0 ? thrusts_from_actor(u, cfg.params) : env.prev_action();
    const StepResult r = env.step(u);

    Transition tr;
    tr.obs = obs;
    tr.action = u.u.cwiseMax(-1.0).cwiseMin(1.0);
    tr.reward = r.reward;
    tr.next_obs = encode(r.next_state, cfg.mode, cfg.env);
    tr.done = r.terminal();
    tr.prev_action = prev.thrust;
    buffer.add(tr);

    if (t >= learner.warmup && static_cast<std::int64_t>(buffer.size()) >= batch) {
      learner.update(buffer);
    }

    if (r.done) {
      ++result.episodes;
      env.reset();
      obs = encode(env.state(), cfg.mode, cfg.env);
    } else {
      obs = tr.next_obs;
    }

    const std::int64_t done_steps = t + 1;
    if (done_steps % cfg.eval_interval == 0) {
      const EvalResult ev = evaluate(actor_policy(learner.actor(), cfg.mode, cfg.env), cfg.env,
                                     cfg.params, cfg.eval_episodes, eval_seed);
      EvalRow row;
      row.env_step = done_steps;
      row.mean_return = ev.mean_return;
      row.std_return = ev.std_return;
      row.mean_terminal_error = ev.mean_terminal_error;
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.log.rows.push_back(row);
      if (ev.mean_return > result.best_eval_return) {
        result.best_eval_return = ev.mean_return;
        result.best_actor = learner.actor();
      }
    }
    if (checkpoint_interval > 0 && on_checkpoint && done_steps % checkpoint_interval == 0) {
      on_checkpoint(done_steps, learner.actor());
    }
  }
  result.final_actor = learner.actor();
  if (result.log.rows.empty()) result.best_actor = result.final_actor;
  return result;
}

}  // namespace eqrl

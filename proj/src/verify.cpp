#include "eqrl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "eqrl/agents.hpp"
#include "eqrl/mlp.hpp"
#include "eqrl/symmetry.hpp"

namespace eqrl {

std::string_view to_string(Fault f) {
  switch (f) {
    case Fault::none: return "none";
    case Fault::attitude_sign: return "attitude-sign";
    case Fault::theta_sign: return "theta-sign";
  }
  return "?";
}

Fault parse_fault(std::string_view s) {
  if (s == "none") return Fault::none;
  if (s == "attitude-sign") return Fault::attitude_sign;
  if (s == "theta-sign") return Fault::theta_sign;
  throw std::invalid_argument("unknown fault '" + std::string(s) +
                              "' (expected none, attitude-sign or theta-sign)");
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 uniform_vec(std::mt19937_64& rng, double half) {
  return Vec3(uniform(rng, -half, half), uniform(rng, -half, half), uniform(rng, -half, half));
}

double max_abs(const std::array<double, ReducedState::kSize>& a,
               const std::array<double, ReducedState::kSize>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

State random_state(std::mt19937_64& rng) {
  State s;
  s.x = uniform_vec(rng, 5.0);
  s.v = uniform_vec(rng, 3.0);
  s.R = random_rotation(rng);
  s.Omega = uniform_vec(rng, 5.0);
  return s;
}

Action random_action(std::mt19937_64& rng, const QuadrotorParams& p) {
  Action a;
  for (int i = 0; i < 4; ++i) a.thrust(i) = uniform(rng, 0.0, p.thrust_max);
  return a;
}

double state_distance(const State& a, const State& b) {
  double m = (a.x - b.x).cwiseAbs().maxCoeff();
  m = std::max(m, (a.v - b.v).cwiseAbs().maxCoeff());
  m = std::max(m, (a.R - b.R).cwiseAbs().maxCoeff());
  return std::max(m, (a.Omega - b.Omega).cwiseAbs().maxCoeff());
}

State integrate_step(const State& s, const Action& a, double dt, const QuadrotorParams& p,
                     Fault fault) {
  if (fault != Fault::attitude_sign) return rk4_step(s, a, dt, p);
  return rk4_step_with(s, a, dt, p, [](const State& st, const Action& ac, const QuadrotorParams& pp) {
    StateDeriv d = dynamics_deriv(st, ac, pp);
    d.R_dot = -d.R_dot;
    return d;
  });
}

double equivariance_step_error(std::mt19937_64& rng, int n, const QuadrotorParams& p, double dt,
                               Fault fault) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const State s = random_state(rng);
    const Action a = random_action(rng, p);
    const GroupElement g(uniform(rng, -kPi, kPi));
    const State lhs = integrate_step(act_on_state(s, g), act_on_action(a, g), dt, p, fault);
    const State rhs = act_on_state(integrate_step(s, a, dt, p, fault), g);
    worst = std::max(worst, state_distance(lhs, rhs));
  }
  return worst;
}

double equivariance_rollout_error(std::mt19937_64& rng, int n, int steps,
                                  const QuadrotorParams& p, double dt, Fault fault) {
  double worst = 0.0;
  const double hover = p.hover_thrust();
  for (int i = 0; i < n; ++i) {
    State s;
    s.x = uniform_vec(rng, 3.0);
    s.v = uniform_vec(rng, 1.0);
    s.R = random_rotation(rng);
    s.Omega = uniform_vec(rng, 2.0);
    const GroupElement g(uniform(rng, -kPi, kPi));
    State gs = act_on_state(s, g);
    for (int k = 0; k < steps; ++k) {
      Action a;
      for (int j = 0; j < 4; ++j) a.thrust(j) = hover * (1.0 + uniform(rng, -0.1, 0.1));
      s = integrate_step(s, a, dt, p, fault);
      gs = integrate_step(gs, act_on_action(a, g), dt, p, fault);
      worst = std::max(worst, state_distance(gs, act_on_state(s, g)));
    }
  }
  return worst;
}

double reward_invariance_error(std::mt19937_64& rng, int n, const EnvConfig& cfg,
                               const QuadrotorParams& p) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    State s = random_state(rng);
    s.x = cfg.x_d + uniform_vec(rng, cfg.e_x_max);
    const Action a = random_action(rng, p);
    const Action a_prev = random_action(rng, p);
    const GroupElement g(uniform(rng, -kPi, kPi));
    const double r = reward(s, a, a_prev, cfg, p);
    const double rg = reward(act_on_state(s, g), act_on_action(a, g), act_on_action(a_prev, g), cfg, p);
    worst = std::max(worst, std::abs(r - rg));
  }
  return worst;
}

QuotientErrors quotient_errors(std::mt19937_64& rng, int n, Fault fault) {
  QuotientErrors out;
  auto reduce = [fault](const State& s) {
    GroupElement g = representative_angle(s);
    if (fault == Fault::theta_sign) g = g.inverse();
    const State rotated = act_on_state(s, g);
    return std::pair{pack_reduced(rotated), rotated.x.y()};
  };
  for (int i = 0; i < n; ++i) {
    State s = random_state(rng);
    if (i == 0) {
      s = State{};
      s.x = Vec3(0.0, 0.0, 1.0);  // at rest in hover attitude straight above the target
    } else if (i % 10 == 0) {
      s.x.head<2>().setZero();
      if (i % 20 == 0) s.v.head<2>().setZero();
    }
    const GroupElement g(uniform(rng, -kPi, kPi));
    const auto [r, x2] = reduce(s);
    const auto [rg, gx2] = reduce(act_on_state(s, g));
    out.reduced = std::max(out.reduced, max_abs(r.values, rg.values));
    out.rotated_x2 = std::max({out.rotated_x2, std::abs(x2), std::abs(gx2)});
  }
  return out;
}

double network_invariance_error(std::mt19937_64& rng, int n, const EnvConfig& cfg,
                                const QuadrotorParams& p, int hidden) {
  const int dim = obs_dim(AgentMode::equivariant);
  const Mlp td3_actor = make_actor(dim, hidden, kActionDim, Activation::tanh, rng);
  const Mlp sac_actor = make_actor(dim, hidden, 2 * kActionDim, Activation::identity, rng);
  const Mlp critic = make_critic(dim, hidden, rng);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    State s = random_state(rng);
    s.x = cfg.x_d + uniform_vec(rng, cfg.e_x_max);
    const GroupElement g(uniform(rng, -kPi, kPi));
    const State gs = act_on_state(s, g);
    const Eigen::VectorXd o = encode(s, AgentMode::equivariant, cfg);
    const Eigen::VectorXd og = encode(gs, AgentMode::equivariant, cfg);
    const Eigen::VectorXd a = actor_from_thrusts(random_action(rng, p), p).u;
    for (const Mlp* actor : {&td3_actor, &sac_actor}) {
      worst = std::max(worst, (actor->forward(o) - actor->forward(og)).cwiseAbs().maxCoeff());
    }
    const double q = critic.forward(stack_inputs(o, a))(0, 0);
    const double qg = critic.forward(stack_inputs(og, a))(0, 0);
    worst = std::max(worst, std::abs(q - qg));
  }
  return worst;
}

namespace {

constexpr double kFdStep = 1e-4;
// The five-point stencil below carries about eps |L| / h ~ 1e-13 of rounding
// noise, so gradients below this magnitude are compared absolutely.
constexpr double kGradFloor = 1e-6;

using ReluPattern = std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>>;

ReluPattern relu_pattern(const Mlp& net, const ForwardCache& cache) {
  ReluPattern out;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    if (net.layers()[l].activation == Activation::relu) out.push_back(cache.pre[l].array() > 0.0);
  }
  return out;
}

bool same_pattern(const ReluPattern& a, const ReluPattern& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != b[i]).any()) return false;
  }
  return true;
}

// Loss sum(w .* net(x)) with the parameter or input under test shifted by
// `offset`; nullopt when the shift moved a ReLU across its kink.
template <typename Shifted>
std::optional<double> fd_derivative(const ReluPattern& base, Shifted&& shifted) {
  double f[4];
  const double offsets[4] = {-2.0 * kFdStep, -kFdStep, kFdStep, 2.0 * kFdStep};
  for (int i = 0; i < 4; ++i) {
    ReluPattern pattern;
    f[i] = shifted(offsets[i], pattern);
    if (!same_pattern(base, pattern)) return std::nullopt;
  }
  return (8.0 * (f[2] - f[1]) - (f[3] - f[0])) / (12.0 * kFdStep);
}

double loss_of(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
               ReluPattern& pattern) {
  ForwardCache c;
  const Eigen::MatrixXd y = net.forward(x, c);
  pattern = relu_pattern(net, c);
  return (w.array() * y.array()).sum();
}

void record(GradientCheck& out, double analytic, const std::optional<double>& numeric) {
  if (!numeric) {
    ++out.skipped_kinks;
    return;
  }
  const double denom = std::max({std::abs(analytic), std::abs(*numeric), kGradFloor});
  out.worst_relative = std::max(out.worst_relative, std::abs(analytic - *numeric) / denom);
  ++out.checked;
}

void check_network(Mlp net, std::mt19937_64& rng, int samples, GradientCheck& out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int batch = 3;
  Eigen::MatrixXd x(net.input_dim(), batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  Eigen::MatrixXd w(net.output_dim(), batch);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);

  ForwardCache cache;
  net.forward(x, cache);
  const ReluPattern base = relu_pattern(net, cache);
  Eigen::MatrixXd grad_x;
  const MlpGradient grad = net.backward(cache, w, &grad_x);

  auto param = [&net](std::size_t l, bool is_bias, Eigen::Index k) -> double& {
    auto& layer = net.mutable_layers()[l];
    return is_bias ? layer.bias.data()[k] : layer.weight.data()[k];
  };

  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const Eigen::Index nw = net.layers()[l].weight.size();
    const Eigen::Index nb = net.layers()[l].bias.size();
    std::uniform_int_distribution<Eigen::Index> pick_w(0, nw - 1), pick_b(0, nb - 1);
    for (int i = 0; i < samples; ++i) {
      const bool is_bias = i % 4 == 3;
      const Eigen::Index k = is_bias ? pick_b(rng) : pick_w(rng);
      const double analytic = is_bias ? grad.bias[l].data()[k] : grad.weight[l].data()[k];
      const double saved = param(l, is_bias, k);
      const auto numeric = fd_derivative(base, [&](double off, ReluPattern& pat) {
        param(l, is_bias, k) = saved + off;
        return loss_of(net, x, w, pat);
      });
      param(l, is_bias, k) = saved;
      record(out, analytic, numeric);
    }
  }

  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const auto numeric = fd_derivative(base, [&](double off, ReluPattern& pat) {
      Eigen::MatrixXd xs = x;
      xs.data()[k] += off;
      return loss_of(net, xs, w, pat);
    });
    record(out, grad_x.data()[k], numeric);
  }
}

}  // namespace

GradientCheck gradient_check(std::mt19937_64& rng, int draws, int obs_dim_, int hidden,
                             int samples_per_layer) {
  GradientCheck out;
  for (int d = 0; d < draws; ++d) {
    check_network(make_actor(obs_dim_, hidden, kActionDim, Activation::tanh, rng), rng,
                  samples_per_layer, out);
    check_network(make_actor(obs_dim_, hidden, 2 * kActionDim, Activation::identity, rng), rng,
                  samples_per_layer, out);
    check_network(make_critic(obs_dim_, hidden, rng), rng, samples_per_layer, out);
  }
  return out;
}

Rk4OrderStudy rk4_order_study(const QuadrotorParams& p, Fault fault, double base_dt,
                              double t_final, int halvings) {
  State s0;
  s0.v = Vec3(0.5, -0.3, 0.2);
  s0.R = Eigen::AngleAxisd(0.4, Vec3(1.0, 2.0, 0.5).normalized()).toRotationMatrix();
  s0.Omega = Vec3(3.0, -2.0, 1.5);
  const double h = p.hover_thrust();
  const Action a{Eigen::Vector4d(1.3 * h, 0.8 * h, 1.1 * h, 0.75 * h)};

  auto run = [&](double dt, Fault f) {
    const long n = std::lround(t_final / dt);
    State s = s0;
    for (long k = 0; k < n; ++k) s = integrate_step(s, a, dt, p, f);
    return s;
  };

  Rk4OrderStudy out;
  const State ref = run(base_dt / 64.0, Fault::none);
  double dt = base_dt;
  for (int i = 0; i <= halvings; ++i, dt *= 0.5) {
    out.dts.push_back(dt);
    out.errors.push_back(state_distance(run(dt, fault), ref));
  }
  for (std::size_t i = 0; i + 1 < out.errors.size(); ++i) {
    out.ratios.push_back(out.errors[i] / out.errors[i + 1]);
  }
  return out;
}

double mixer_roundtrip_error(std::mt19937_64& rng, int n, const QuadrotorParams& p) {
  double worst = 0.0;
  const double f_max = 4.0 * p.thrust_max;
  for (int i = 0; i < n; ++i) {
    Wrench w;
    w.f = uniform(rng, 0.0, f_max);
    w.M = Vec3(uniform(rng, -1.0, 1.0) * p.arm_length * p.thrust_max,
               uniform(rng, -1.0, 1.0) * p.arm_length * p.thrust_max,
               uniform(rng, -1.0, 1.0) * p.c_tau_f * 2.0 * p.thrust_max);
    const Wrench w2 = mixer(inverse_mixer(w, p), p);
    worst = std::max({worst, std::abs(w2.f - w.f), (w2.M - w.M).cwiseAbs().maxCoeff()});

    const Action a = random_action(rng, p);
    const Action a2 = inverse_mixer(mixer(a, p), p);
    worst = std::max(worst, (a2.thrust - a.thrust).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

std::string fmt_bound(const char* op, double v) {
  std::ostringstream os;
  os << op << ' ' << v;
  return os.str();
}

}  // namespace

std::vector<PropertyResult> run_property_battery(std::uint64_t seed, Fault fault) {
  const QuadrotorParams p;
  const EnvConfig cfg;
  std::vector<PropertyResult> out;
  auto add = [&](std::string name, double observed, std::string bound, bool ok) {
    out.push_back(PropertyResult{std::move(name), observed, std::move(bound), ok});
  };

  std::mt19937_64 rng(seed);
  const double step_err = equivariance_step_error(rng, 1000, p, cfg.dt, fault);
  add("dynamics-equivariance-step", step_err, fmt_bound("<=", kEquivarianceStepTol),
      step_err <= kEquivarianceStepTol);
  const double roll_err = equivariance_rollout_error(rng, 100, 100, p, cfg.dt, fault);
  add("dynamics-equivariance-rollout", roll_err, fmt_bound("<=", kEquivarianceRolloutTol),
      roll_err <= kEquivarianceRolloutTol);

  const double r_err = reward_invariance_error(rng, 1000, cfg, p);
  add("reward-invariance", r_err, fmt_bound("<=", kRewardInvarianceTol),
      r_err <= kRewardInvarianceTol);

  const QuotientErrors q = quotient_errors(rng, 1000, fault);
  add("quotient-well-defined", q.reduced, fmt_bound("<=", kQuotientTol), q.reduced <= kQuotientTol);
  add("quotient-rotated-x2", q.rotated_x2, fmt_bound("<=", kQuotientTol),
      q.rotated_x2 <= kQuotientTol);

  const double n_err = network_invariance_error(rng, 500, cfg, p);
  add("network-invariance", n_err, fmt_bound("<=", kNetworkInvarianceTol),
      n_err <= kNetworkInvarianceTol);

  const GradientCheck gc = gradient_check(rng, 100, obs_dim(AgentMode::equivariant));
  add("gradient-check", gc.worst_relative, fmt_bound("<", kGradientRelTol),
      gc.worst_relative < kGradientRelTol && gc.checked > 0);

  const Rk4OrderStudy rk = rk4_order_study(p, fault);
  const double worst_ratio = *std::min_element(rk.ratios.begin(), rk.ratios.end(),
      [](double a, double b) { return std::abs(a - 16.0) > std::abs(b - 16.0); });
  bool rk_ok = true;
  for (double r : rk.ratios) rk_ok = rk_ok && r >= kRk4RatioLow && r <= kRk4RatioHigh;
  std::ostringstream rb;
  rb << "in [" << kRk4RatioLow << ", " << kRk4RatioHigh << "]";
  add("rk4-order", worst_ratio, rb.str(), rk_ok);

  const double m_err = mixer_roundtrip_error(rng, 1000, p);
  add("mixer-roundtrip", m_err, fmt_bound("<=", kMixerTol), m_err <= kMixerTol);
  return out;
}

}  // namespace eqrl

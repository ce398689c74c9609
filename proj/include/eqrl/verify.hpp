#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "eqrl/dynamics.hpp"
#include "eqrl/environment.hpp"

namespace eqrl {

// Deliberate defects used to show which property catches which fault.
enum class Fault {
  none,
  attitude_sign,  // R' = -R hat(Omega)
  theta_sign,     // representative angle +atan2(x2, x1)
};

std::string_view to_string(Fault f);
Fault parse_fault(std::string_view s);  // throws std::invalid_argument

// Pass thresholds of the property battery.
inline constexpr double kEquivarianceStepTol = 1e-10;
inline constexpr double kEquivarianceRolloutTol = 1e-8;
inline constexpr double kRewardInvarianceTol = 1e-12;
inline constexpr double kQuotientTol = 1e-10;
inline constexpr double kNetworkInvarianceTol = 1e-10;
inline constexpr double kGradientRelTol = 1e-5;
inline constexpr double kRk4RatioLow = 12.0;
inline constexpr double kRk4RatioHigh = 20.0;
inline constexpr double kMixerTol = 1e-12;

/// Random state: x in [-5, 5]^3, v in [-3, 3]^3, uniformly random attitude,
/// Omega in [-5, 5]^3.
State random_state(std::mt19937_64& rng);
/// Uniformly random rotation (normalized Gaussian quaternion).
Mat3 random_rotation(std::mt19937_64& rng);
/// Per-rotor thrusts uniform in [0, T_max].
Action random_action(std::mt19937_64& rng, const QuadrotorParams& p);

/// Largest absolute component difference.
double state_distance(const State& a, const State& b);

/// One RK4 step, with the attitude-sign fault applied if requested.
State integrate_step(const State& s, const Action& a, double dt, const QuadrotorParams& p,
                     Fault fault);

/// Worst |F(g s, a) - g F(s, a)| over n single steps.
double equivariance_step_error(std::mt19937_64& rng, int n, const QuadrotorParams& p, double dt,
                               Fault fault = Fault::none);
/// Same over n rollouts of `steps` steps with near-hover random thrusts,
/// worst over every step of every rollout.
double equivariance_rollout_error(std::mt19937_64& rng, int n, int steps,
                                  const QuadrotorParams& p, double dt, Fault fault = Fault::none);

/// Worst |reward(g s, a, a_prev) - reward(s, a, a_prev)|.
double reward_invariance_error(std::mt19937_64& rng, int n, const EnvConfig& cfg,
                               const QuadrotorParams& p);

struct QuotientErrors {
  double reduced = 0.0;     // worst |[g s] - [s]|
  double rotated_x2 = 0.0;  // worst |x2| after rotating onto the representative
};

/// Random cases plus a fixed share with x1 = x2 = 0, including a state at
/// rest in hover attitude.
QuotientErrors quotient_errors(std::mt19937_64& rng, int n, Fault fault = Fault::none);

/// Worst |pi(g s) - pi(s)| and |Q(g s, a) - Q(s, a)| for freshly
/// initialized equivariant-mode TD3 actor, SAC actor and critic.
double network_invariance_error(std::mt19937_64& rng, int n, const EnvConfig& cfg,
                                const QuadrotorParams& p, int hidden = 256);

struct GradientCheck {
  double worst_relative = 0.0;
  long checked = 0;
  long skipped_kinks = 0;  // samples whose ReLU pattern changed within +-h
};

/// Central differences against backward() for the actor and critic
/// architectures: `draws` fresh parameter/input draws each, a random subset
/// of every layer's weights and biases plus the input gradient.
GradientCheck gradient_check(std::mt19937_64& rng, int draws, int obs_dim, int hidden = 256,
                             int samples_per_layer = 24);

struct Rk4OrderStudy {
  std::vector<double> dts;
  std::vector<double> errors;  // vs the clean dt/64 reference at t_final
  std::vector<double> ratios;  // errors[i] / errors[i + 1]
};

/// Forced maneuver: constant unbalanced thrusts from a tilted, spinning
/// initial state, integrated to t_final with base_dt and `halvings` halvings.
/// The reference always uses the clean dynamics.
Rk4OrderStudy rk4_order_study(const QuadrotorParams& p, Fault fault = Fault::none,
                              double base_dt = 0.02, double t_final = 1.0, int halvings = 3);

/// Worst of |mixer(inverse_mixer(w)) - w| and |inverse_mixer(mixer(a)) - a|.
double mixer_roundtrip_error(std::mt19937_64& rng, int n, const QuadrotorParams& p);

struct PropertyResult {
  std::string name;
  double observed = 0.0;
  std::string bound;
  bool passed = false;
};

/// The full battery at its pass thresholds.
std::vector<PropertyResult> run_property_battery(std::uint64_t seed, Fault fault = Fault::none);

}  // namespace eqrl

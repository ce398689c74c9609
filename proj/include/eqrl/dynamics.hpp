#pragma once

#include <Eigen/Dense>

#include "eqrl/errors.hpp"
#include "eqrl/so3.hpp"

namespace eqrl {

// Physical constants of the vehicle. Defaults describe a medium-size
// quadrotor with hover thrust at 25% of the per-rotor range.
struct QuadrotorParams {
  double mass = 1.0;                                        // kg
  Mat3 inertia = Eigen::Vector3d(0.01, 0.01, 0.02).asDiagonal();  // kg m^2
  double gravity = 9.81;                                    // m/s^2
  double arm_length = 0.17;                                 // m
  double c_tau_f = 0.016;                                   // m
  double thrust_max = 9.81;                                 // N per rotor

  /// Throws PreconditionError naming the violated invariant.
  void validate() const;
  double hover_thrust() const { return mass * gravity / 4.0; }
};

// Position/velocity in the inertial frame (e3 points down, along gravity),
// attitude R maps body to inertial, Omega is resolved in the body frame.
struct State {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 Omega = Vec3::Zero();

  bool all_finite() const {
    return x.allFinite() && v.allFinite() && R.allFinite() && Omega.allFinite();
  }
};

// Rotor thrusts T1..T4 in newtons.
struct Action {
  Eigen::Vector4d thrust = Eigen::Vector4d::Zero();

  static Action uniform(double t) { return Action{Eigen::Vector4d::Constant(t)}; }
};

struct Wrench {
  double f = 0.0;         // total thrust, N
  Vec3 M = Vec3::Zero();  // body moment, N m
};

struct StateDeriv {
  Vec3 x_dot = Vec3::Zero();
  Vec3 v_dot = Vec3::Zero();
  Mat3 R_dot = Mat3::Zero();
  Vec3 Omega_dot = Vec3::Zero();
};

/// Thrust allocation:
///   f  = T1 + T2 + T3 + T4
///   M1 = d (T4 - T2)
///   M2 = d (T1 - T3)
///   M3 = c_tau_f (T1 - T2 + T3 - T4)
Wrench mixer(const Action& a, const QuadrotorParams& p);

/// Exact inverse of mixer(). Thrusts are returned unclamped and may be
/// negative for large moments.
Action inverse_mixer(const Wrench& w, const QuadrotorParams& p);

/// Right-hand side of the rigid-body equations of motion:
///   x' = v,  m v' = m g e3 - f R e3,  R' = R hat(Omega),
///   J Omega' = M - Omega x (J Omega).
StateDeriv dynamics_deriv(const State& s, const Action& a, const QuadrotorParams& p);

/// One classical RK4 step of length dt on the flattened state with the
/// action held constant (zero-order hold). R is reorthonormalized after the
/// step. Throws NumericalFault on a non-finite result and InvariantViolation
/// if R drifted too far to be repaired.
State rk4_step(const State& s, const Action& a, double dt, const QuadrotorParams& p);

namespace detail {

inline State advance(const State& s, const StateDeriv& k, double h) {
  return State{s.x + h * k.x_dot, s.v + h * k.v_dot, s.R + h * k.R_dot,
               s.Omega + h * k.Omega_dot};
}

State finish_step(const State& raw);

}  // namespace detail

/// RK4 with a caller-supplied right-hand side. rk4_step() is this template
/// instantiated with dynamics_deriv; other instantiations exist for
/// fault-injection studies.
template <typename Deriv>
State rk4_step_with(const State& s, const Action& a, double dt, const QuadrotorParams& p,
                    Deriv&& deriv) {
  if (!(dt > 0.0)) throw PreconditionError("rk4_step: dt must be positive");
  const StateDeriv k1 = deriv(s, a, p);
  const StateDeriv k2 = deriv(detail::advance(s, k1, 0.5 * dt), a, p);
  const StateDeriv k3 = deriv(detail::advance(s, k2, 0.5 * dt), a, p);
  const StateDeriv k4 = deriv(detail::advance(s, k3, dt), a, p);
  const double w = dt / 6.0;
  State out;
  out.x = s.x + w * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot);
  out.v = s.v + w * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  out.R = s.R + w * (k1.R_dot + 2.0 * k2.R_dot + 2.0 * k3.R_dot + k4.R_dot);
  out.Omega = s.Omega + w * (k1.Omega_dot + 2.0 * k2.Omega_dot + 2.0 * k3.Omega_dot + k4.Omega_dot);
  return detail::finish_step(out);
}

}  // namespace eqrl

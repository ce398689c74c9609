#include "eqrl/dynamics.hpp"

#include <cmath>

namespace eqrl {

void QuadrotorParams::validate() const {
  if (!(mass > 0.0)) throw PreconditionError("QuadrotorParams: mass must be positive");
  if (!inertia.allFinite() || (inertia - inertia.transpose()).norm() > 1e-12) {
    throw PreconditionError("QuadrotorParams: inertia must be symmetric");
  }
  Eigen::LLT<Mat3> llt(inertia);
  if (llt.info() != Eigen::Success) {
    throw PreconditionError("QuadrotorParams: inertia must be positive definite");
  }
  if (!(gravity > 0.0)) throw PreconditionError("QuadrotorParams: gravity must be positive");
  if (!(arm_length > 0.0)) throw PreconditionError("QuadrotorParams: arm_length must be positive");
  if (!(c_tau_f > 0.0)) throw PreconditionError("QuadrotorParams: c_tau_f must be positive");
  if (!(thrust_max > hover_thrust())) {
    throw PreconditionError("QuadrotorParams: thrust_max must exceed m*g/4 for hover to be feasible");
  }
}

Wrench mixer(const Action& a, const QuadrotorParams& p) {
  const auto& T = a.thrust;
  const double d = p.arm_length;
  const double c = p.c_tau_f;
  Wrench w;
  w.f = T(0) + T(1) + T(2) + T(3);
  w.M = Vec3(-d * T(1) + d * T(3), d * T(0) - d * T(2), c * (T(0) - T(1) + T(2) - T(3)));
  return w;
}

Action inverse_mixer(const Wrench& w, const QuadrotorParams& p) {
  const double d = p.arm_length;
  const double c = p.c_tau_f;
  // Pairs (T1 + T3) and (T2 + T4) from f and M3, then split each pair with M2 / M1.
  const double odd = 0.5 * (w.f + w.M.z() / c);
  const double even = 0.5 * (w.f - w.M.z() / c);
  Action a;
  a.thrust(0) = 0.5 * (odd + w.M.y() / d);
  a.thrust(2) = 0.5 * (odd - w.M.y() / d);
  a.thrust(3) = 0.5 * (even + w.M.x() / d);
  a.thrust(1) = 0.5 * (even - w.M.x() / d);
  return a;
}

StateDeriv dynamics_deriv(const State& s, const Action& a, const QuadrotorParams& p) {
  const Wrench w = mixer(a, p);
  const Vec3 e3 = Vec3::UnitZ();
  StateDeriv d;
  d.x_dot = s.v;
  d.v_dot = p.gravity * e3 - (w.f / p.mass) * (s.R * e3);
  d.R_dot = s.R * hat(s.Omega);
  d.Omega_dot = p.inertia.llt().solve(w.M - s.Omega.cross(p.inertia * s.Omega));
  return d;
}

namespace detail {

State finish_step(const State& raw) {
  if (!raw.all_finite()) {
    throw NumericalFault("rk4_step: state became non-finite (integrator blow-up)");
  }
  if (orthogonality_error(raw.R) > kMaxRepairableDrift) {
    throw InvariantViolation("rk4_step: attitude drifted off SO(3) beyond repair; reduce dt");
  }
  State out = raw;
  out.R = reorthonormalize(raw.R);
  return out;
}

}  // namespace detail

State rk4_step(const State& s, const Action& a, double dt, const QuadrotorParams& p) {
  return rk4_step_with(s, a, dt, p, dynamics_deriv);
}

}  // namespace eqrl

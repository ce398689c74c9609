#include "eqrl/symmetry.hpp"

#include <cmath>
#include <string>

namespace eqrl {

namespace {
constexpr double kMaxResidualX2 = 1e-9;
}

State act_on_state(const State& s, const GroupElement& g) {
  const Mat3 Q = g.rotation();
  return State{Q * s.x, Q * s.v, Q * s.R, s.Omega};
}

Action act_on_action(const Action& a, const GroupElement&) { return a; }

GroupElement representative_angle(const State& s) {
  // Directly above/below the target the position does not fix the angle.
  // Fall back to other vectors that rotate with the state so the
  // representative stays constant on the whole orbit: horizontal velocity,
  // then the horizontal projections of body axes b1 and b2 (they cannot both
  // be vertical).
  const Vec3 candidates[] = {s.x, s.v, s.R.col(0), s.R.col(1)};
  for (const Vec3& c : candidates) {
    if (c.x() != 0.0 || c.y() != 0.0) return GroupElement(-std::atan2(c.y(), c.x()));
  }
  return GroupElement(0.0);
}

ReducedState pack_reduced(const State& r) {
  ReducedState out;
  auto& o = out.values;
  o[0] = r.x.x();
  o[1] = r.x.z();
  o[2] = r.v.x();
  o[3] = r.v.y();
  o[4] = r.v.z();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) o[5 + 3 * i + j] = r.R(i, j);
  }
  o[14] = r.Omega.x();
  o[15] = r.Omega.y();
  o[16] = r.Omega.z();
  return out;
}

Reduction reduce_state(const State& s) {
  const GroupElement g = representative_angle(s);
  const State rotated = act_on_state(s, g);
  if (!(std::abs(rotated.x.y()) <= kMaxResidualX2)) {
    throw InvariantViolation("reduce_state: rotated x2 = " + std::to_string(rotated.x.y()) +
                             " is not zero");
  }
  return Reduction{pack_reduced(rotated), g};
}

}  // namespace eqrl

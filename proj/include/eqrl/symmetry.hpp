#pragma once

#include <array>
#include <cstddef>

#include "eqrl/dynamics.hpp"

namespace eqrl {

// Element of S^1 acting on the state by rotation about the vertical axis.
class GroupElement {
 public:
  GroupElement() = default;
  explicit GroupElement(double theta) : theta_(wrap_angle(theta)) {}

  double theta() const { return theta_; }
  Mat3 rotation() const { return rot_z(theta_); }
  GroupElement compose(const GroupElement& other) const {
    return GroupElement(theta_ + other.theta_);
  }
  GroupElement inverse() const { return GroupElement(-theta_); }

 private:
  double theta_ = 0.0;
};

// Representative of a state's orbit, packed as
//   [x]1, [x]3, [v]1..3, [R]11 [R]12 ... [R]33 (row-major), [Omega]1..3.
// [x]2 is identically zero by construction and is not stored.
struct ReducedState {
  static constexpr std::size_t kSize = 17;
  std::array<double, kSize> values{};

  double operator[](std::size_t i) const { return values[i]; }
};

struct Reduction {
  ReducedState reduced;
  GroupElement g;  // the rotation that produced the representative
};

/// (rot_z(theta) x, rot_z(theta) v, rot_z(theta) R, Omega).
State act_on_state(const State& s, const GroupElement& g);

/// Thrusts are body-frame quantities: the group acts trivially.
Action act_on_action(const Action& a, const GroupElement& g);

/// -atan2(x2, x1) for the (error-frame) position of s. When x1 = x2 = 0 the
/// angle comes from the first of v, R e1, R e2 with a nonzero horizontal part,
/// which gives 0 for a state at rest in hover attitude.
GroupElement representative_angle(const State& s);

/// Rotates s onto its orbit representative ([x]2 = 0, [x]1 >= 0) and packs
/// the 17-vector. Throws InvariantViolation if the rotated x2 exceeds 1e-9.
Reduction reduce_state(const State& s);

/// Packs an already-rotated state without checking [x]2.
ReducedState pack_reduced(const State& rotated);

}  // namespace eqrl

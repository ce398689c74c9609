#include "eqrl/so3.hpp"

#include <cmath>
#include <string>

#include "eqrl/errors.hpp"

namespace eqrl {

Mat3 hat(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

Vec3 vee(const Mat3& S) {
  const double asym = (S + S.transpose()).norm();
  if (!(asym <= kSkewTolerance)) {
    throw PreconditionError("vee: matrix is not skew-symmetric (||S + S^T||_F = " +
                            std::to_string(asym) + ")");
  }
  return Vec3(S(2, 1), S(0, 2), S(1, 0));
}

double wrap_angle(double theta) {
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Mat3 rot_z(double theta) {
  const double t = wrap_angle(theta);
  const double c = std::cos(t);
  const double s = std::sin(t);
  Mat3 R;
  R << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return R;
}

double orthogonality_error(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  return orthogonality_error(R) <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

Mat3 reorthonormalize(const Mat3& R) {
  if (!R.allFinite()) {
    throw PreconditionError("reorthonormalize: non-finite entries");
  }
  const double drift = orthogonality_error(R);
  if (!(drift <= kMaxRepairableDrift)) {
    throw PreconditionError("reorthonormalize: ||R^T R - I||_F = " + std::to_string(drift) +
                            " exceeds the repairable bound");
  }
  if (R.determinant() <= 0.0) {
    throw PreconditionError("reorthonormalize: det(R) <= 0, input is a reflection");
  }

  // Quadratic convergence from drift <= 1e-3: three iterations reach rounding.
  Mat3 X = R;
  for (int it = 0; it < 8; ++it) {
    const Mat3 next = 0.5 * (X + X.inverse().transpose());
    const double step = (next - X).norm();
    X = next;
    if (step < 1e-15) break;
  }
  return X;
}

}  // namespace eqrl

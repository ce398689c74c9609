#pragma once

#include <Eigen/Dense>

namespace eqrl {

using Vec3 = Eigen::Vector3d;
// Eigen storage is column-major; every "row-major" flattening in this project
// is produced explicitly by index, never by reinterpreting Mat3::data().
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

// Rotation hygiene bounds for matrices that claim to live on SO(3).
inline constexpr double kRotationTolerance = 1e-9;
// Largest ||R^T R - I||_F that reorthonormalize() will repair.
inline constexpr double kMaxRepairableDrift = 1e-3;
// Largest ||S + S^T||_F that vee() accepts as skew-symmetric.
inline constexpr double kSkewTolerance = 1e-9;

/// Skew-symmetric matrix with hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Inverse of hat(). Throws PreconditionError if S is not skew within
/// kSkewTolerance, which usually means upstream numerical drift.
Vec3 vee(const Mat3& S);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

/// exp(theta * hat(e3)): rotation by theta about the vertical axis.
/// The third row and column are exactly (0, 0, 1).
Mat3 rot_z(double theta);

/// ||R^T R - I||_F.
double orthogonality_error(const Mat3& R);

/// True when R satisfies the SO(3) invariants within tol.
bool is_rotation(const Mat3& R, double tol = kRotationTolerance);

/// Nearest rotation in Frobenius norm (orthogonal polar factor), computed by
/// the Newton iteration X <- (X + X^-T) / 2. Requires ||R^T R - I||_F <=
/// kMaxRepairableDrift and det(R) > 0; throws PreconditionError otherwise.
Mat3 reorthonormalize(const Mat3& R);

}  // namespace eqrl

#pragma once

#include "quadsim/types.hpp"

namespace quadsim::so3 {

// Roll-pitch-yaw angles in radians. The matrix conversion is unambiguous for
// pitch in (-pi/2, pi/2).
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

// hat(v) w == v x w for all w; the result is antisymmetric.
Mat3 hat(const Vec3& v);

// Inverse of hat. Rejects a matrix whose symmetric part has Frobenius norm
// above `tol`.
Vec3 vee(const Mat3& m, double tol = 1e-9);

// vee of the antisymmetric part (m - m^T)/2. For matrices that are
// antisymmetric only up to discretization error.
Vec3 vee_antisym(const Mat3& m);

// Rodrigues formula, exp(hat(axis_angle)).
Mat3 exp(const Vec3& axis_angle);

// Body-to-inertial rotation from intrinsic yaw-pitch-roll composition:
// R = Rz(yaw) Ry(pitch) Rx(roll).
Mat3 euler_to_rotation(const EulerAngles& angles);

bool is_rotation(const Mat3& m, double tol = 1e-9);

// Scalar attitude error 1/2 tr(I - R_d^T R); ranges over [0, 2] and vanishes
// iff R == R_d. Positive definite around the identity for relative rotation
// angles below pi.
double attitude_error_value(const Mat3& R, const Mat3& R_d);

// e_R = 1/2 (R_d^T R - R^T R_d)^vee
Vec3 attitude_error(const Mat3& R, const Mat3& R_d);

// e_w = w - R^T R_d w_d, expressed in the body frame.
Vec3 angvel_error(const Vec3& omega, const Mat3& R, const Mat3& R_d,
                  const Vec3& omega_d);

// Nearest rotation in Frobenius norm (polar projection). Intended to repair
// integration drift; throws if the input is nearer a reflection
// (non-positive determinant).
Mat3 reorthonormalize(const Mat3& m);

}  // namespace quadsim::so3

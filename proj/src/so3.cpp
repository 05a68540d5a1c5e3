#include "quadsim/so3.hpp"

#include <cmath>
#include <stdexcept>

#include "quadsim/errors.hpp"

namespace quadsim::so3 {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m, double tol) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  if (sym.norm() > tol) {
    throw std::invalid_argument(
        "vee: input is not antisymmetric (symmetric part norm " +
        std::to_string(sym.norm()) + ")");
  }
  return {m(2, 1), m(0, 2), m(1, 0)};
}

Vec3 vee_antisym(const Mat3& m) {
  return {0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
          0.5 * (m(1, 0) - m(0, 1))};
}

Mat3 exp(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  const Mat3 k = hat(axis_angle);
  if (angle < 1e-12) {
    return Mat3::Identity() + k;
  }
  const double s = std::sin(angle) / angle;
  const double c = (1.0 - std::cos(angle)) / (angle * angle);
  return Mat3::Identity() + s * k + c * k * k;
}

Mat3 euler_to_rotation(const EulerAngles& angles) {
  const double cr = std::cos(angles.roll), sr = std::sin(angles.roll);
  const double cp = std::cos(angles.pitch), sp = std::sin(angles.pitch);
  const double cy = std::cos(angles.yaw), sy = std::sin(angles.yaw);
  // Inertial-to-body matrix of the yaw-pitch-roll composition; the returned
  // body-to-inertial rotation is its transpose.
  Mat3 r_ib;
  r_ib << cy * cp, cp * sy, -sp,  //
      cy * sr * sp - cr * sy, cr * cy + sr * sp * sy, sr * cp,  //
      sr * sy + cr * cy * sp, cr * sp * sy - cy * sr, cr * cp;
  return r_ib.transpose();
}

bool is_rotation(const Mat3& m, double tol) {
  return (m * m.transpose() - Mat3::Identity()).norm() <= tol &&
         std::abs(m.determinant() - 1.0) <= tol;
}

double attitude_error_value(const Mat3& R, const Mat3& R_d) {
  return 0.5 * (Mat3::Identity() - R_d.transpose() * R).trace();
}

Vec3 attitude_error(const Mat3& R, const Mat3& R_d) {
  // 1/2 (R_d^T R - R^T R_d)^vee, i.e. vee of the antisymmetric part
  return vee_antisym(R_d.transpose() * R);
}

Vec3 angvel_error(const Vec3& omega, const Mat3& R, const Mat3& R_d,
                  const Vec3& omega_d) {
  return omega - R.transpose() * R_d * omega_d;
}

Mat3 reorthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() <= 0.0) {
    throw std::invalid_argument(
        "reorthonormalize: input projects to a reflection (det <= 0)");
  }
  return r;
}

}  // namespace quadsim::so3

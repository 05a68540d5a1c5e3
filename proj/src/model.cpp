#include "quadsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "quadsim/errors.hpp"
#include "quadsim/keyvalue.hpp"

namespace quadsim::model {
namespace {

// 4x4 map from per-motor thrusts to (F, tau_x, tau_y, tau_z) with the yaw
// row expressed in thrust units via drag_coeff/thrust_coeff.
Eigen::Matrix4d allocation_matrix(const VehicleParams& p) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    m(0, i) = 1.0;
    m(1, i) = p.arm_x * kRollSign[i];
    m(2, i) = p.arm_y * kPitchSign[i];
    m(3, i) = (p.drag_coeff / p.thrust_coeff) * kYawSign[i];
  }
  return m;
}

}  // namespace

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw ConfigError("params: mass must be positive");
  if ((inertia - inertia.transpose()).norm() > 1e-12 * inertia.norm() + 1e-15) {
    throw ConfigError("params: inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError("params: inertia must be positive definite");
  }
  if (!(arm_x > 0.0) || !(arm_y > 0.0)) {
    throw ConfigError("params: arm_x and arm_y must be positive");
  }
  if (!(thrust_coeff > 0.0)) {
    throw ConfigError("params: thrust_coeff must be positive");
  }
  if (!(drag_coeff > 0.0)) {
    throw ConfigError("params: drag_coeff must be positive");
  }
  if (!(theta2 > 0.0)) throw ConfigError("params: theta2 must be positive");
  if (!(pwm0 >= 0.0 && pwm0 < 1.0)) {
    throw ConfigError("params: pwm0 must lie in [0, 1)");
  }
  if (!(u_max > 0.0)) throw ConfigError("params: u_max must be positive");

  const Eigen::Matrix4d alloc = allocation_matrix(*this);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(alloc);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12) {
    throw ConfigError("params: allocation matrix is ill-conditioned");
  }
}

double pwm_to_angvel(double pwm, const VehicleParams& params) {
  if (!(pwm >= 0.0 && pwm <= 1.0)) {
    throw std::invalid_argument("pwm_to_angvel: pwm " + std::to_string(pwm) +
                                " outside [0, 1]");
  }
  return std::max(0.0, params.theta1 + params.theta2 * pwm);
}

double angvel_to_thrust(double omega, const VehicleParams& params) {
  if (!(omega >= 0.0)) {
    throw std::invalid_argument("angvel_to_thrust: negative angular velocity");
  }
  return params.thrust_coeff * omega * omega;
}

double pwm_to_thrust(double pwm, const VehicleParams& params) {
  return angvel_to_thrust(pwm_to_angvel(pwm, params), params);
}

double thrust_to_pwm(double thrust, const VehicleParams& params) {
  if (!(thrust >= 0.0)) {
    throw std::invalid_argument("thrust_to_pwm: negative thrust");
  }
  if (thrust == 0.0) return 0.0;
  const double omega = std::sqrt(thrust / params.thrust_coeff);
  return (omega - params.theta1) / params.theta2;
}

BodyWrench wrench_from_angvels(const std::array<double, 4>& omega,
                               const VehicleParams& params,
                               bool apply_drag_offset) {
  BodyWrench w;
  double yaw_sq = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double f = angvel_to_thrust(omega[i], params);
    w.thrust += f;
    w.torque.x() += params.arm_x * kRollSign[i] * f;
    w.torque.y() += params.arm_y * kPitchSign[i] * f;
    yaw_sq += kYawSign[i] * omega[i] * omega[i];
  }
  w.torque.z() = params.drag_coeff * yaw_sq;
  if (apply_drag_offset) w.torque.z() += params.drag_offset;
  return w;
}

BodyWrench motors_to_wrench(const MotorCommand& cmd,
                            const VehicleParams& params,
                            bool apply_drag_offset) {
  std::array<double, 4> omega{};
  for (int i = 0; i < 4; ++i) omega[i] = pwm_to_angvel(cmd.pwm[i], params);
  return wrench_from_angvels(omega, params, apply_drag_offset);
}

AllocationResult allocate(const BodyWrench& wrench,
                          const VehicleParams& params) {
  if (!std::isfinite(wrench.thrust) || !wrench.torque.allFinite()) {
    throw std::invalid_argument("allocate: non-finite wrench");
  }
  AllocationResult out;
  const double yaw_gain = params.thrust_coeff / (4.0 * params.drag_coeff);
  for (int i = 0; i < 4; ++i) {
    double f = 0.25 * wrench.thrust +
               kRollSign[i] * wrench.torque.x() / (4.0 * params.arm_x) +
               kPitchSign[i] * wrench.torque.y() / (4.0 * params.arm_y) +
               kYawSign[i] * yaw_gain * wrench.torque.z();
    if (f < 0.0) {
      f = 0.0;
      out.saturated = true;
    }
    double pwm = thrust_to_pwm(f, params);
    if (pwm > 1.0) {
      pwm = 1.0;
      out.saturated = true;
    }
    out.command.pwm[i] = pwm;
  }
  return out;
}

VehicleParams load_params(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  VehicleParams p;
  p.mass = kv.number("mass");

  const std::string units = kv.text_or("inertia_units", "kgm2");
  double scale = 1.0;
  if (units == "kgmm2") {
    scale = 1e-6;
  } else if (units != "kgm2") {
    throw ConfigError(path.string() + ": inertia_units must be kgm2 or kgmm2");
  }
  Mat3 j = Mat3::Zero();
  j(0, 0) = kv.number("inertia_xx");
  j(1, 1) = kv.number("inertia_yy");
  j(2, 2) = kv.number("inertia_zz");
  j(0, 1) = j(1, 0) = kv.number_or("inertia_xy", 0.0);
  j(0, 2) = j(2, 0) = kv.number_or("inertia_xz", 0.0);
  j(1, 2) = j(2, 1) = kv.number_or("inertia_yz", 0.0);
  p.inertia = scale * j;

  p.arm_x = kv.number("arm_x");
  p.arm_y = kv.number("arm_y");
  p.thrust_coeff = kv.number("thrust_coeff");
  p.drag_coeff = kv.number("drag_coeff");
  p.drag_offset = kv.number("drag_offset");
  p.theta1 = kv.number("theta1");
  p.theta2 = kv.number("theta2");
  p.pwm0 = kv.number("pwm0");
  p.u_max = kv.number("u_max");
  kv.reject_unknown_keys();
  p.validate();
  return p;
}

void save_params(const VehicleParams& params,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  char buf[512];
  const Mat3& j = params.inertia;
  std::snprintf(buf, sizeof(buf),
                "mass = %.9g\n"
                "inertia_units = kgm2\n"
                "inertia_xx = %.9g\n"
                "inertia_yy = %.9g\n"
                "inertia_zz = %.9g\n"
                "inertia_xy = %.9g\n"
                "inertia_xz = %.9g\n"
                "inertia_yz = %.9g\n",
                params.mass, j(0, 0), j(1, 1), j(2, 2), j(0, 1), j(0, 2),
                j(1, 2));
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "arm_x = %.9g\n"
                "arm_y = %.9g\n"
                "thrust_coeff = %.9g\n"
                "drag_coeff = %.9g\n"
                "drag_offset = %.9g\n"
                "theta1 = %.9g\n"
                "theta2 = %.9g\n"
                "pwm0 = %.9g\n"
                "u_max = %.9g\n",
                params.arm_x, params.arm_y, params.thrust_coeff,
                params.drag_coeff, params.drag_offset, params.theta1,
                params.theta2, params.pwm0, params.u_max);
  out << buf;
}

}  // namespace quadsim::model

#include "quadsim/control.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "quadsim/errors.hpp"
#include "quadsim/keyvalue.hpp"
#include "quadsim/so3.hpp"

namespace quadsim::control {

void ControlGains::validate() const {
  if (!(k_r > 0.0 && k_v > 0.0 && k_R > 0.0 && k_omega > 0.0)) {
    throw ConfigError("gains: all gains must be strictly positive");
  }
}

std::pair<Vec3, Vec3> position_errors(const RigidBodyState& state,
                                      const StateReference& ref) {
  return {state.r - ref.r_d, state.v - ref.v_d};
}

Vec3 desired_force_vector(const Vec3& e_r, const Vec3& e_v, const Vec3& a_d,
                          const model::VehicleParams& params,
                          const ControlGains& gains) {
  return -gains.k_r * e_r - gains.k_v * e_v +
         params.mass * kGravity * e3() + params.mass * a_d;
}

double thrust_command(const Vec3& A, const Mat3& R) {
  return A.dot(R * e3());
}

Mat3 desired_rotation(const Vec3& A, double yaw_d) {
  const double norm_a = A.norm();
  if (norm_a < kDegeneracyTol) {
    throw DegeneracyError("desired_rotation: thrust direction undefined");
  }
  const Vec3 r3 = A / norm_a;
  const Vec3 heading(std::cos(yaw_d), std::sin(yaw_d), 0.0);
  const Vec3 cross = r3.cross(heading);
  const double norm_c = cross.norm();
  if (norm_c < kDegeneracyTol) {
    throw DegeneracyError(
        "desired_rotation: thrust axis parallel to heading");
  }
  const Vec3 r2 = cross / norm_c;
  const Vec3 r1 = r2.cross(r3);
  Mat3 R_d;
  R_d.col(0) = r1;
  R_d.col(1) = r2;
  R_d.col(2) = r3;
  return R_d;
}

Vec3 torque_command(const RigidBodyState& state, const StateReference& ref,
                    const model::VehicleParams& params,
                    const ControlGains& gains) {
  const Vec3 e_R = so3::attitude_error(state.R, ref.R_d);
  const Vec3 e_w =
      so3::angvel_error(state.omega, state.R, ref.R_d, ref.omega_d);
  const Mat3 rel = state.R.transpose() * ref.R_d;
  return -gains.k_R * e_R - gains.k_omega * e_w +
         state.omega.cross(params.inertia * state.omega) -
         params.inertia * (so3::hat(state.omega) * rel * ref.omega_d -
                           rel * ref.omega_d_dot);
}

ControlOutput control_step(const RigidBodyState& state,
                           const StateReference& ref,
                           const model::VehicleParams& params,
                           const ControlGains& gains,
                           const Mat3* fallback_R_d) {
  ControlOutput out;
  const auto [e_r, e_v] = position_errors(state, ref);
  const Vec3 A = desired_force_vector(e_r, e_v, ref.a_d, params, gains);

  Mat3 R_d;
  try {
    R_d = desired_rotation(A, ref.yaw_d);
  } catch (const DegeneracyError&) {
    if (A.norm() < kDegeneracyTol) {
      out.degenerate_force = true;
    } else {
      out.degenerate_heading = true;
    }
    if (fallback_R_d != nullptr) {
      R_d = *fallback_R_d;
    } else {
      R_d = ref.R_d;  // reference attitude as last resort
    }
  }

  StateReference tracked = ref;
  tracked.R_d = R_d;

  out.wrench.thrust = thrust_command(A, state.R);
  out.wrench.torque = torque_command(state, tracked, params, gains);
  out.R_d_used = R_d;
  out.errors.e_r = e_r;
  out.errors.e_v = e_v;
  out.errors.e_R = so3::attitude_error(state.R, R_d);
  out.errors.e_omega =
      so3::angvel_error(state.omega, state.R, R_d, ref.omega_d);
  return out;
}

BoundCheck check_trajectory_bound(std::span<const StateReference> refs,
                                  const model::VehicleParams& params,
                                  double B) {
  if (!(B > 0.0)) throw std::invalid_argument("check_trajectory_bound: B <= 0");
  BoundCheck out;
  for (const StateReference& ref : refs) {
    const double value =
        (params.mass * (ref.a_d - kGravity * e3())).norm();
    out.max_value = std::max(out.max_value, value);
  }
  out.within = out.max_value < B;
  return out;
}

InitialCheck check_initial_conditions(const RigidBodyState& state0,
                                      const StateReference& ref0,
                                      const model::VehicleParams& params,
                                      const ControlGains& gains, double psi1) {
  if (!(psi1 > 0.0 && psi1 < 1.0)) {
    throw std::invalid_argument(
        "check_initial_conditions: psi1 must lie in (0, 1)");
  }
  InitialCheck out;
  out.psi = so3::attitude_error_value(state0.R, ref0.R_d);
  out.e_omega_sq =
      so3::angvel_error(state0.omega, state0.R, ref0.R_d, ref0.omega_d)
          .squaredNorm();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(params.inertia);
  const double lambda_min = eig.eigenvalues().minCoeff();
  out.omega_bound = 2.0 / lambda_min * gains.k_R * (1.0 - out.psi);
  out.ok = out.psi <= psi1 && out.e_omega_sq < out.omega_bound;
  return out;
}

ControlGains load_gains(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  ControlGains g;
  g.k_r = kv.number("k_r");
  g.k_v = kv.number("k_v");
  g.k_R = kv.number("k_R");
  g.k_omega = kv.number("k_omega");
  kv.reject_unknown_keys();
  g.validate();
  return g;
}

void save_gains(const ControlGains& gains, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "k_r = %.9g\nk_v = %.9g\nk_R = %.9g\nk_omega = %.9g\n",
                gains.k_r, gains.k_v, gains.k_R, gains.k_omega);
  out << buf;
}

}  // namespace quadsim::control

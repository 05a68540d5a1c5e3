#pragma once

#include <span>
#include <utility>

#include "quadsim/model.hpp"
#include "quadsim/types.hpp"

namespace quadsim::control {

struct ControlGains {
  double k_r = 10.0;
  double k_v = 5.0;
  double k_R = 0.6;
  double k_omega = 0.15;

  void validate() const;  // all gains strictly positive
};

// Reference consumed by the controller at one instant: flat outputs with
// derivatives plus the expanded attitude reference.
struct StateReference {
  Vec3 r_d = Vec3::Zero();
  Vec3 v_d = Vec3::Zero();
  Vec3 a_d = Vec3::Zero();
  double yaw_d = 0.0;
  double yaw_rate_d = 0.0;
  Mat3 R_d = Mat3::Identity();
  Vec3 omega_d = Vec3::Zero();
  Vec3 omega_d_dot = Vec3::Zero();
};

struct TrackingErrors {
  Vec3 e_r = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
  Vec3 e_R = Vec3::Zero();
  Vec3 e_omega = Vec3::Zero();
};

struct ControlOutput {
  model::BodyWrench wrench;      // commanded thrust and torque
  Mat3 R_d_used;                 // attitude reference actually tracked
  TrackingErrors errors;
  bool degenerate_force = false;    // |A| below threshold
  bool degenerate_heading = false;  // thrust axis parallel to heading
};

inline constexpr double kDegeneracyTol = 1e-6;

std::pair<Vec3, Vec3> position_errors(const RigidBodyState& state,
                                      const StateReference& ref);

// A = -k_r e_r - k_v e_v + m g e3 + m a_d; the desired thrust vector in the
// inertial frame. Degenerates (|A| ~ 0) when the reference free-falls.
Vec3 desired_force_vector(const Vec3& e_r, const Vec3& e_v, const Vec3& a_d,
                          const model::VehicleParams& params,
                          const ControlGains& gains);

// F = A . (R e3). May be negative when the attitude points away from A;
// allocation clamps it downstream.
double thrust_command(const Vec3& A, const Mat3& R);

// Attitude reference [r1 r2 r3] with r3 = A/|A|, r2 orthogonal to the
// heading vector [cos yaw, sin yaw, 0], r1 = r2 x r3. Throws
// DegeneracyError when |A| or the heading cross product is ~ 0.
Mat3 desired_rotation(const Vec3& A, double yaw_d);

// tau = -k_R e_R - k_w e_w + w x Jw - J(hat(w) R^T R_d w_d - R^T R_d dw_d)
Vec3 torque_command(const RigidBodyState& state, const StateReference& ref,
                    const model::VehicleParams& params,
                    const ControlGains& gains);

// One controller evaluation: force vector, thrust, fresh attitude reference
// (falling back to fallback_R_d for one tick on degeneracy), torque.
ControlOutput control_step(const RigidBodyState& state,
                           const StateReference& ref,
                           const model::VehicleParams& params,
                           const ControlGains& gains,
                           const Mat3* fallback_R_d = nullptr);

struct BoundCheck {
  double max_value = 0.0;  // max over samples of |m (a_d - g e3)|
  bool within = false;
};

// Feasibility bound on the commanded specific force along the reference.
BoundCheck check_trajectory_bound(std::span<const StateReference> refs,
                                  const model::VehicleParams& params,
                                  double B);

struct InitialCheck {
  bool ok = false;
  double psi = 0.0;           // attitude error value at t = 0
  double e_omega_sq = 0.0;    // |e_w(0)|^2
  double omega_bound = 0.0;   // 2 k_R (1 - psi) / lambda_min(J)
};

// Attitude-error and angular-velocity conditions for guaranteed convergence
// from the initial state. psi1 must lie in (0, 1).
InitialCheck check_initial_conditions(const RigidBodyState& state0,
                                      const StateReference& ref0,
                                      const model::VehicleParams& params,
                                      const ControlGains& gains, double psi1);

ControlGains load_gains(const std::filesystem::path& path);
void save_gains(const ControlGains& gains, const std::filesystem::path& path);

}  // namespace quadsim::control

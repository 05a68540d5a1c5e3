#pragma once

#include <array>
#include <filesystem>

#include "quadsim/types.hpp"

namespace quadsim::model {

// Sign pattern of the thrust-to-wrench map. Index i is motor i+1:
//   tau_x = arm_x (f3 + f4 - f1 - f2)
//   tau_y = arm_y (f2 + f3 - f1 - f4)
//   tau_z = drag_coeff (w1^2 + w3^2 - w2^2 - w4^2)
inline constexpr std::array<double, 4> kRollSign{-1.0, -1.0, 1.0, 1.0};
inline constexpr std::array<double, 4> kPitchSign{-1.0, 1.0, 1.0, -1.0};
inline constexpr std::array<double, 4> kYawSign{1.0, -1.0, 1.0, -1.0};

// Physical and actuator parameters of the vehicle. Defaults describe the
// 0.605 kg test quadrotor used throughout; note that arm_x/arm_y are a
// configuration guess (88.4 mm, from a 250 mm motor-to-motor diagonal) and
// should be overridden when the true geometry is known.
struct VehicleParams {
  double mass = 0.605;  // kg
  Mat3 inertia = (Eigen::Vector3d(1.5905e-3, 1.4813e-3, 2.7684e-3))
                     .asDiagonal();  // kg m^2
  double arm_x = 0.0884;  // m, motor offset from the body x axis (|y|)
  double arm_y = 0.0884;  // m, motor offset from the body y axis (|x|)
  double thrust_coeff = 9.3945e-7;  // N/(rad/s)^2, f = c w^2
  double drag_coeff = 5.5939e-7;    // N m/(rad/s)^2, yaw torque slope
  double drag_offset = -0.4785;     // N m, fitted yaw torque intercept
  double theta1 = -131.538;         // rad/s, actuator line intercept
  double theta2 = 4310.17;          // rad/s per unit pwm, actuator line slope
  double pwm0 = 0.0305;             // spin-up threshold
  double u_max = 16.8;              // V, full-scale supply voltage

  // Throws ConfigError when an invariant fails (positive mass, SPD inertia,
  // positive arms/coefficients, pwm0 in [0,1), invertible allocation).
  void validate() const;
};

struct MotorCommand {
  std::array<double, 4> pwm{0.0, 0.0, 0.0, 0.0};  // each in [0, 1]
};

// Collective thrust along body z plus body torques.
struct BodyWrench {
  double thrust = 0.0;         // N
  Vec3 torque = Vec3::Zero();  // N m
};

struct AllocationResult {
  MotorCommand command;
  bool saturated = false;  // any thrust or pwm clamp engaged
};

// Actuator line w = theta1 + theta2 * pwm, clamped at zero below the
// spin-up threshold. pwm must lie in [0, 1].
double pwm_to_angvel(double pwm, const VehicleParams& params);

// f = c w^2 for w >= 0.
double angvel_to_thrust(double omega, const VehicleParams& params);

// Composition of the two maps above.
double pwm_to_thrust(double pwm, const VehicleParams& params);

// Inverse of pwm_to_thrust on the physical branch above the spin-up
// threshold; zero thrust maps to pwm 0.
double thrust_to_pwm(double thrust, const VehicleParams& params);

// Wrench as a function of the four propeller speeds; linear in the squared
// speeds. The fitted torque intercept is added only when apply_drag_offset
// is set (plant-bias emulation; keep it off for the nominal model).
BodyWrench wrench_from_angvels(const std::array<double, 4>& omega,
                               const VehicleParams& params,
                               bool apply_drag_offset = false);

BodyWrench motors_to_wrench(const MotorCommand& cmd,
                            const VehicleParams& params,
                            bool apply_drag_offset = false);

// Control allocation: invert the wrench map into per-motor commands.
// Negative per-motor thrusts clamp to zero first, then pwm clamps to [0, 1];
// collective thrust is not redistributed after clamping. The round trip
// motors_to_wrench(allocate(w)) == w is exact when nothing clamps.
AllocationResult allocate(const BodyWrench& wrench,
                          const VehicleParams& params);

// Flat key-value parameter file. Keys: mass, inertia_xx..inertia_zz
// (off-diagonals optional, default 0), inertia_units (kgm2 | kgmm2),
// arm_x, arm_y, thrust_coeff, drag_coeff, drag_offset, theta1, theta2,
// pwm0, u_max.
VehicleParams load_params(const std::filesystem::path& path);
void save_params(const VehicleParams& params,
                 const std::filesystem::path& path);

}  // namespace quadsim::model

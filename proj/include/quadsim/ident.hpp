#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "quadsim/control.hpp"
#include "quadsim/model.hpp"
#include "quadsim/trajectory.hpp"
#include "quadsim/types.hpp"

namespace quadsim::ident {

struct ThrustSample {
  double omega_mean = 0.0;  // rad/s, mean propeller speed
  double thrust = 0.0;      // N, per-propeller thrust
};

struct TorqueSample {
  double sq_diff = 0.0;  // rad^2/s^2, w1^2 + w3^2 - w2^2 - w4^2
  double tau_z = 0.0;    // N m, J_zz * dw_z/dt
};

struct ActuatorLine {
  double theta1 = 0.0;  // rad/s
  double theta2 = 0.0;  // rad/s per unit pwm
};

// Actuator line from the motor KV rating and supply voltage:
// theta2 = KV * (2 pi / 60) * u_max, theta1 = -pwm0 * theta2.
ActuatorLine actuator_line_from_kv(double kv_rpm_per_volt, double u_max,
                                   double pwm0);

struct ThrustFit {
  double thrust_coeff = 0.0;
  double residual_rms = 0.0;
  int n = 0;
};

// Least squares through the origin on f = c w^2:
// c = sum(w^2 f) / sum(w^4). Rejects a sample set whose speeds are all zero.
ThrustFit fit_thrust_coeff(std::span<const ThrustSample> samples);

struct LineFit {
  double slope = 0.0;      // b1
  double intercept = 0.0;  // b2
  double residual_rms = 0.0;
  int n = 0;
};

// Ordinary least squares line tau_z = b1 * sq_diff + b2. Rejects fewer than
// two samples or a design with no spread in sq_diff.
LineFit fit_drag_coeff(std::span<const TorqueSample> samples);

struct HoverExperimentConfig {
  double duration = 6.0;  // s per payload
  double window = 2.0;    // s of steady hover averaged at the end
  double dt = 1e-3;
  double control_period = 2e-3;
  Vec3 r0 = Vec3(0.0, 0.0, 1.0);
};

// Hover with added payload masses and log the steady-state mean pwm; each
// payload yields one (mean speed, required per-motor thrust) sample with
// thrust = (m + payload) g / 4. Throws when a payload cannot be lifted.
std::vector<ThrustSample> gen_hover_experiment(
    std::span<const double> payloads, const model::VehicleParams& params,
    const control::ControlGains& gains, const HoverExperimentConfig& config = {});

struct ScaleExperiment {
  std::vector<ThrustSample> samples;
  std::vector<double> scale_mass;  // kg shown by the scale per level
};

// Bench test: uniform pwm on all motors with the vehicle held on a scale.
// Rejects pwm levels at or beyond lift-off (4 f >= m g).
ScaleExperiment gen_scale_experiment(std::span<const double> pwm_levels,
                                     const model::VehicleParams& params);

struct YawExperimentConfig {
  traj::YawBangBangSpec maneuver{2.0, 2.0};
  Vec3 r0 = Vec3(0.0, 0.0, 1.0);
  double dt = 1e-3;
  double control_period = 2e-3;
  double gyro_noise_std = 0.01;  // rad/s on the recorded yaw rate
  std::uint64_t seed = 0;
  double settle_skip = 0.2;  // s dropped after each acceleration switch
  bool plant_bias = false;   // enable the fitted torque offset in the plant
};

// Closed-loop yaw maneuver on the attitude rig; yields per-tick
// (sq_diff, J_zz * dw_z/dt) samples with the yaw rate differentiated
// numerically at the control tick spacing.
std::vector<TorqueSample> gen_yaw_experiment(
    const YawExperimentConfig& config, const model::VehicleParams& params,
    const control::ControlGains& gains);

// Gyroscopic coupling term of the body-z angular momentum balance,
// (w x J w)_z expanded with the full inertia matrix. Zero for a pure yaw
// spin with diagonal inertia; quantifies the error of neglecting it.
double full_attitude_residual(const RigidBodyState& state,
                              const model::VehicleParams& params);

// Two-column sample CSVs with a header line.
void write_thrust_samples(std::span<const ThrustSample> samples,
                          const std::filesystem::path& path);
std::vector<ThrustSample> read_thrust_samples(
    const std::filesystem::path& path);
void write_torque_samples(std::span<const TorqueSample> samples,
                          const std::filesystem::path& path);
std::vector<TorqueSample> read_torque_samples(
    const std::filesystem::path& path);

}  // namespace quadsim::ident

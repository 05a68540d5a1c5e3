#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "quadsim/control.hpp"
#include "quadsim/keyvalue.hpp"
#include "quadsim/model.hpp"
#include "quadsim/types.hpp"

namespace quadsim::sim {

enum class Mode { kFull, kAttitudeOnly };

struct SimConfig {
  double dt = 1e-3;              // integrator step, s
  double duration = 10.0;        // s
  double control_period = 2e-3;  // s, must be an integer multiple of dt
  Mode mode = Mode::kFull;
  bool plant_bias_b2 = false;  // apply the fitted yaw-torque offset in the plant
  RigidBodyState initial;
  double pos_noise_std = 0.0;  // m, measurement noise seen by the controller
  double att_noise_std = 0.0;  // rad
  std::uint64_t seed = 0;

  void validate() const;  // 0 < dt <= 0.01, duration > 0, period on the grid
};

struct StateDerivative {
  Vec3 r_dot;
  Vec3 v_dot;
  Mat3 R_dot;
  Vec3 omega_dot;
};

// Newton-Euler right-hand side:
//   r' = v,  m v' = -m g e3 + F R e3,  J w' = tau - w x J w,  R' = R hat(w)
StateDerivative derivatives(const RigidBodyState& state,
                            const model::BodyWrench& wrench,
                            const model::VehicleParams& params);

// One classical RK4 step with the wrench held constant; the attitude is
// integrated as a raw matrix and reorthonormalized afterwards. In attitude
// mode r and v are passed through untouched (spherical-joint rig).
// Throws DivergenceError when any state magnitude exceeds 1e6.
RigidBodyState step(const RigidBodyState& state,
                    const model::BodyWrench& wrench,
                    const model::VehicleParams& params, double dt,
                    Mode mode = Mode::kFull);

// Everything the controller returns at one control tick.
struct ControlTick {
  model::MotorCommand pwm;        // command actually sent to the motors
  model::BodyWrench commanded;    // controller wrench before allocation
  control::StateReference ref;
  control::TrackingErrors errors;
  bool saturated = false;
  bool degenerate = false;
};

using ControllerFn =
    std::function<ControlTick(double t, const RigidBodyState& measured)>;

struct LogRow {
  double t = 0.0;
  RigidBodyState state;
  model::BodyWrench wrench;  // wrench applied by the motors (after allocation)
  model::MotorCommand pwm;
  Vec3 ref_r = Vec3::Zero();
  Vec3 ref_v = Vec3::Zero();
  double ref_yaw = 0.0;
  control::TrackingErrors errors;
};

struct SimLog {
  std::vector<LogRow> rows;

  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;
  static SimLog read_csv(std::istream& in, const std::string& name);
  static SimLog read_csv(const std::filesystem::path& path);

  static const char* csv_header();
};

// Closed-loop driver: the controller runs every control_period, the plant
// integrates at dt with the allocated wrench held between ticks. One log row
// per control tick. Deterministic for fixed inputs.
SimLog run(const SimConfig& config, const ControllerFn& controller,
           const model::VehicleParams& params);

SimConfig load_config(const std::filesystem::path& path);

// Read a config out of an already-parsed key-value file; lets callers layer
// extra keys of their own on the same file.
SimConfig config_from_kv(const KeyValueFile& kv);

}  // namespace quadsim::sim

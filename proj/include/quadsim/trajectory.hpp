#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "quadsim/control.hpp"
#include "quadsim/types.hpp"

namespace quadsim::traj {

// Flat outputs (position, yaw) with the derivatives the controller consumes.
struct FlatOutputs {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  double yaw = 0.0;
  double yaw_rate = 0.0;
};

// A reference trajectory as a function of time. `breakpoints` lists the
// instants where the acceleration jumps; the attitude-reference finite
// differencing keeps its stencil on one side of each breakpoint.
struct FlatTrajectory {
  std::function<FlatOutputs(double)> eval;
  double horizon = 0.0;  // s; evaluation beyond it holds the final values
  std::vector<double> breakpoints;
};

// Constant position and heading.
FlatTrajectory hover(const Vec3& r0, double yaw0);

// Circular climb of the given radius and revolution period, reached through
// a smoothstep radial ramp so the reference starts at rest on the axis.
FlatTrajectory helix(double radius, double period, double climb_rate,
                     double z0, double ramp, double horizon = 0.0);

// Constant-magnitude yaw acceleration that flips sign halfway: accelerate on
// [0, T/2), decelerate on [T/2, T], position held at r0 throughout. Yaw and
// yaw rate are continuous; yaw ends at alpha T^2 / 4 with zero rate.
struct YawBangBangSpec {
  double alpha = 2.0;     // rad/s^2, magnitude of the yaw acceleration
  double duration = 2.0;  // s
};
FlatTrajectory yaw_bangbang(const YawBangBangSpec& spec,
                            const Vec3& r0 = Vec3(0.0, 0.0, 1.0));

// Expand flat outputs at time t into a full controller reference. The
// attitude reference depends on the position/velocity feedback errors, so the
// current state and gains enter; those errors are held fixed across the
// finite-difference stencil used for omega_d and its derivative.
control::StateReference expand(const FlatTrajectory& flat, double t,
                               const model::VehicleParams& params,
                               const control::ControlGains& gains,
                               const RigidBodyState& state,
                               bool feedback = true);

// Feedforward-only variant (zero feedback errors), for trajectory analysis.
control::StateReference expand_feedforward(const FlatTrajectory& flat,
                                           double t,
                                           const model::VehicleParams& params,
                                           const control::ControlGains& gains);

// Sample expand_feedforward over [0, horizon] at the given spacing.
std::vector<control::StateReference> sample_references(
    const FlatTrajectory& flat, const model::VehicleParams& params,
    const control::ControlGains& gains, double dt);

// Key-value trajectory file: `kind = hover | helix | yaw_bangbang` plus
// kind-specific keys (see README).
FlatTrajectory load_trajectory(const std::filesystem::path& path);

}  // namespace quadsim::traj

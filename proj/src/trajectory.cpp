#include "quadsim/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "quadsim/errors.hpp"
#include "quadsim/keyvalue.hpp"
#include "quadsim/so3.hpp"

namespace quadsim::traj {
namespace {

constexpr double kFdStep = 1e-4;  // s, attitude-reference differencing step

// Shift the 5-point stencil so it does not straddle a breakpoint. Returns
// the stencil center; at a breakpoint this degenerates to a one-sided
// evaluation next to it.
double stencil_center(double t, const std::vector<double>& breakpoints,
                      double half_span) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (double b : breakpoints) {
    if (b <= t) lo = std::max(lo, b);
    if (b > t) hi = std::min(hi, b);
  }
  const double lo_edge = std::isfinite(lo) ? lo + half_span : lo;
  const double hi_edge = std::isfinite(hi) ? hi - half_span : hi;
  if (lo_edge > hi_edge) return t;  // segment narrower than the stencil
  return std::clamp(t, lo_edge, hi_edge);
}

}  // namespace

FlatTrajectory hover(const Vec3& r0, double yaw0) {
  FlatTrajectory flat;
  flat.eval = [r0, yaw0](double) {
    FlatOutputs out;
    out.r = r0;
    out.yaw = yaw0;
    return out;
  };
  flat.horizon = 0.0;
  return flat;
}

FlatTrajectory helix(double radius, double period, double climb_rate,
                     double z0, double ramp, double horizon) {
  if (!(radius > 0.0) || !(period > 0.0) || !(ramp > 0.0)) {
    throw ConfigError("helix: radius, period and ramp must be positive");
  }
  FlatTrajectory flat;
  const double nu = 2.0 * std::numbers::pi / period;
  flat.eval = [=](double t) {
    t = std::max(t, 0.0);
    // smoothstep radial ramp: s in [0, 1], C1 everywhere
    double s = 1.0, s1 = 0.0, s2 = 0.0;
    if (t < ramp) {
      const double u = t / ramp;
      s = u * u * (3.0 - 2.0 * u);
      s1 = 6.0 * u * (1.0 - u) / ramp;
      s2 = (6.0 - 12.0 * u) / (ramp * ramp);
    }
    const double c = std::cos(nu * t), sn = std::sin(nu * t);
    FlatOutputs out;
    out.r = Vec3(radius * s * c, radius * s * sn, z0 + climb_rate * t);
    out.v = Vec3(radius * (s1 * c - s * nu * sn),
                 radius * (s1 * sn + s * nu * c), climb_rate);
    out.a = Vec3(radius * (s2 * c - 2.0 * s1 * nu * sn - s * nu * nu * c),
                 radius * (s2 * sn + 2.0 * s1 * nu * c - s * nu * nu * sn),
                 0.0);
    return out;
  };
  flat.horizon = horizon;
  flat.breakpoints = {0.0, ramp};
  return flat;
}

FlatTrajectory yaw_bangbang(const YawBangBangSpec& spec, const Vec3& r0) {
  if (!(spec.alpha >= 0.0) || !(spec.duration > 0.0)) {
    throw ConfigError("yaw_bangbang: need alpha >= 0 and duration > 0");
  }
  FlatTrajectory flat;
  const double alpha = spec.alpha;
  const double T = spec.duration;
  flat.eval = [=](double t) {
    FlatOutputs out;
    out.r = r0;
    t = std::clamp(t, 0.0, T);
    if (t < 0.5 * T) {
      out.yaw = 0.5 * alpha * t * t;
      out.yaw_rate = alpha * t;
    } else {
      // decelerating branch, shifted by alpha T^2/4 for continuity
      out.yaw = 0.25 * alpha * T * T - 0.5 * alpha * (t - T) * (t - T);
      out.yaw_rate = -alpha * (t - T);
    }
    return out;
  };
  flat.horizon = T;
  flat.breakpoints = {0.0, 0.5 * T, T};
  return flat;
}

namespace {

control::StateReference expand_impl(const FlatTrajectory& flat, double t,
                                    const model::VehicleParams& params,
                                    const control::ControlGains& gains,
                                    const Vec3& e_r, const Vec3& e_v) {
  const FlatOutputs now = flat.eval(t);
  control::StateReference ref;
  ref.r_d = now.r;
  ref.v_d = now.v;
  ref.a_d = now.a;
  ref.yaw_d = now.yaw;
  ref.yaw_rate_d = now.yaw_rate;

  // Attitude reference with the feedback errors frozen at their values at t.
  const auto rotation_at = [&](double tt) {
    const FlatOutputs f = flat.eval(tt);
    const Vec3 A = control::desired_force_vector(e_r, e_v, f.a, params, gains);
    return control::desired_rotation(A, f.yaw);
  };

  ref.R_d = rotation_at(t);

  const double h = kFdStep;
  const double c = stencil_center(t, flat.breakpoints, 2.0 * h);
  std::array<Mat3, 5> R;
  for (int i = 0; i < 5; ++i) R[i] = rotation_at(c + (i - 2) * h);

  const auto omega_at = [&](int i) {
    // body angular velocity of the reference: vee(R^T dR/dt)
    const Mat3 R_dot = (R[i + 1] - R[i - 1]) / (2.0 * h);
    return so3::vee_antisym(R[i].transpose() * R_dot);
  };
  ref.omega_d = omega_at(2);
  ref.omega_d_dot = (omega_at(3) - omega_at(1)) / (2.0 * h);
  return ref;
}

}  // namespace

control::StateReference expand(const FlatTrajectory& flat, double t,
                               const model::VehicleParams& params,
                               const control::ControlGains& gains,
                               const RigidBodyState& state, bool feedback) {
  Vec3 e_r = Vec3::Zero(), e_v = Vec3::Zero();
  if (feedback) {
    const FlatOutputs now = flat.eval(t);
    e_r = state.r - now.r;
    e_v = state.v - now.v;
  }
  return expand_impl(flat, t, params, gains, e_r, e_v);
}

control::StateReference expand_feedforward(const FlatTrajectory& flat,
                                           double t,
                                           const model::VehicleParams& params,
                                           const control::ControlGains& gains) {
  return expand_impl(flat, t, params, gains, Vec3::Zero(), Vec3::Zero());
}

std::vector<control::StateReference> sample_references(
    const FlatTrajectory& flat, const model::VehicleParams& params,
    const control::ControlGains& gains, double dt) {
  if (!(dt > 0.0) || !(flat.horizon > 0.0)) {
    throw std::invalid_argument("sample_references: need dt > 0 and horizon");
  }
  std::vector<control::StateReference> refs;
  const int n = static_cast<int>(std::floor(flat.horizon / dt + 1e-9)) + 1;
  refs.reserve(n);
  for (int i = 0; i < n; ++i) {
    refs.push_back(expand_feedforward(flat, i * dt, params, gains));
  }
  return refs;
}

FlatTrajectory load_trajectory(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  const std::string kind = kv.text("kind");
  FlatTrajectory flat;
  if (kind == "hover") {
    flat = hover(Vec3(kv.number_or("x", 0.0), kv.number_or("y", 0.0),
                      kv.number_or("z", 1.0)),
                 kv.number_or("yaw", 0.0));
    flat.horizon = kv.number_or("duration", 10.0);
  } else if (kind == "helix") {
    flat = helix(kv.number_or("radius", 0.5), kv.number_or("period", 4.0),
                 kv.number_or("climb_rate", 0.1), kv.number_or("z0", 1.0),
                 kv.number_or("ramp", 2.0), kv.number_or("duration", 14.0));
  } else if (kind == "yaw_bangbang") {
    YawBangBangSpec spec;
    spec.alpha = kv.number_or("alpha", 2.0);
    spec.duration = kv.number_or("duration", 2.0);
    flat = yaw_bangbang(spec, Vec3(kv.number_or("x", 0.0),
                                   kv.number_or("y", 0.0),
                                   kv.number_or("z", 1.0)));
  } else {
    throw ConfigError(path.string() + ": unknown trajectory kind '" + kind +
                      "'");
  }
  kv.reject_unknown_keys();
  return flat;
}

}  // namespace quadsim::traj

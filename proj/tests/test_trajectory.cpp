#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "quadsim/errors.hpp"
#include "quadsim/so3.hpp"
#include "quadsim/trajectory.hpp"

using namespace quadsim;

namespace {
constexpr double kPi = std::numbers::pi;

traj::FlatTrajectory default_helix() {
  return traj::helix(0.5, 4.0, 0.1, 1.0, 2.0, 14.0);
}
}  // namespace

TEST_CASE("hover holds constant flat outputs") {
  const traj::FlatTrajectory flat = traj::hover(Vec3(0, 0, 1), 0.25);
  for (double t : {0.0, 1.0, 17.3}) {
    const traj::FlatOutputs f = flat.eval(t);
    CHECK(f.r == Vec3(0, 0, 1));
    CHECK(f.v == Vec3::Zero());
    CHECK(f.a == Vec3::Zero());
    CHECK(f.yaw == 0.25);
    CHECK(f.yaw_rate == 0.0);
  }
}

TEST_CASE("hover expands to a constant attitude reference") {
  const model::VehicleParams p;
  const control::ControlGains g;
  const traj::FlatTrajectory flat = traj::hover(Vec3(0, 0, 1), 0.25);
  const control::StateReference ref =
      traj::expand_feedforward(flat, 3.0, p, g);
  CHECK(ref.omega_d.norm() == 0.0);
  CHECK(ref.omega_d_dot.norm() == 0.0);
  CHECK((ref.R_d - so3::exp(Vec3(0, 0, 0.25))).norm() < 1e-12);
}

TEST_CASE("helix starts on the axis and reaches the commanded circle") {
  const traj::FlatTrajectory flat = default_helix();
  const traj::FlatOutputs at0 = flat.eval(0.0);
  CHECK((at0.r - Vec3(0, 0, 1)).norm() == 0.0);
  CHECK(at0.v.head<2>().norm() == 0.0);  // radial ramp starts at rest
  CHECK(at0.v.z() == doctest::Approx(0.1));

  // well past the ramp: radius 0.5, tangential speed 2 pi R / T
  const traj::FlatOutputs f = flat.eval(7.3);
  CHECK(f.r.head<2>().norm() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.v.head<2>().norm() ==
        doctest::Approx(2.0 * kPi * 0.5 / 4.0).epsilon(1e-12));
  CHECK(f.v.z() == doctest::Approx(0.1));
  CHECK(f.r.z() == doctest::Approx(1.0 + 0.1 * 7.3));
}

TEST_CASE("helix analytic derivatives match finite differences") {
  const traj::FlatTrajectory flat = default_helix();
  const double h = 1e-4;
  for (double t : {0.5, 1.0, 1.7, 2.5, 3.9, 6.02, 11.33}) {
    const traj::FlatOutputs f = flat.eval(t);
    const traj::FlatOutputs fp = flat.eval(t + h);
    const traj::FlatOutputs fm = flat.eval(t - h);
    const Vec3 v_fd = (fp.r - fm.r) / (2.0 * h);
    const Vec3 a_fd = (fp.r - 2.0 * f.r + fm.r) / (h * h);
    CHECK((f.v - v_fd).norm() <= 1e-5);
    CHECK((f.a - a_fd).norm() <= 1e-5);
  }
}

TEST_CASE("yaw_bangbang ramps up and back down") {
  const traj::FlatTrajectory flat = traj::yaw_bangbang({2.0, 2.0});
  CHECK(flat.eval(1.0).yaw == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(flat.eval(2.0).yaw == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(flat.eval(2.0).yaw_rate == doctest::Approx(0.0).epsilon(1e-15));
  // position pinned throughout
  CHECK(flat.eval(0.7).r == Vec3(0, 0, 1));
  CHECK(flat.eval(1.4).v.norm() == 0.0);
}

TEST_CASE("yaw_bangbang is continuous with continuous rate at the switch") {
  const traj::FlatTrajectory flat = traj::yaw_bangbang({3.0, 4.0});
  const double half = 2.0;
  const traj::FlatOutputs before = flat.eval(half - 1e-9);
  const traj::FlatOutputs after = flat.eval(half + 1e-9);
  // the yaw itself moves by rate * 2e-9 across the probe interval
  CHECK(std::abs(before.yaw - after.yaw) < 1e-7);
  CHECK(std::abs(before.yaw_rate - after.yaw_rate) < 1e-7);
}

TEST_CASE("yaw_bangbang acceleration magnitude is constant") {
  const double alpha = 2.5, T = 3.0;
  const traj::FlatTrajectory flat = traj::yaw_bangbang({alpha, T});
  const double h = 1e-5;
  for (double t : {0.2, 0.7, 1.2, 1.44, 1.8, 2.3, 2.8}) {
    const double acc = (flat.eval(t + h).yaw - 2.0 * flat.eval(t).yaw +
                        flat.eval(t - h).yaw) /
                       (h * h);
    CHECK(std::abs(std::abs(acc) - alpha) < 1e-4);
  }
}

TEST_CASE("yaw_bangbang with zero acceleration is a hover heading") {
  const traj::FlatTrajectory flat = traj::yaw_bangbang({0.0, 2.0});
  for (double t : {0.0, 0.5, 1.7}) {
    CHECK(flat.eval(t).yaw == 0.0);
    CHECK(flat.eval(t).yaw_rate == 0.0);
  }
}

TEST_CASE("expand on yaw_bangbang reproduces the yaw-rate kinematics") {
  const model::VehicleParams p;
  const control::ControlGains g;
  const traj::FlatTrajectory flat = traj::yaw_bangbang({2.0, 2.0});
  for (double t : {0.3, 0.7, 1.3, 1.7}) {
    const control::StateReference ref = traj::expand_feedforward(flat, t, p, g);
    const double rate = flat.eval(t).yaw_rate;
    CHECK((ref.omega_d - Vec3(0, 0, rate)).norm() <= 1e-4);
    // constant-magnitude yaw acceleration away from the switch
    const double expected_acc = t < 1.0 ? 2.0 : -2.0;
    CHECK((ref.omega_d_dot - Vec3(0, 0, expected_acc)).norm() <= 1e-3);
  }
}

TEST_CASE("expanded attitude references stay on SO(3)") {
  const model::VehicleParams p;
  const control::ControlGains g;
  const traj::FlatTrajectory flat = default_helix();
  RigidBodyState state;
  state.r = Vec3(0.1, -0.2, 1.1);
  state.v = Vec3(0.05, 0.0, -0.02);
  for (int i = 0; i <= 140; ++i) {
    const double t = 0.1 * i;
    const control::StateReference ref =
        traj::expand(flat, t, p, g, state, true);
    CHECK(so3::is_rotation(ref.R_d, 1e-9));
  }
}

TEST_CASE("reference angular velocity is periodic in the steady phase") {
  const model::VehicleParams p;
  const control::ControlGains g;
  const traj::FlatTrajectory flat = default_helix();
  for (double t : {3.0, 4.5, 5.25}) {
    const control::StateReference a = traj::expand_feedforward(flat, t, p, g);
    const control::StateReference b =
        traj::expand_feedforward(flat, t + 4.0, p, g);
    CHECK((a.omega_d - b.omega_d).norm() <= 1e-4);
  }
}

TEST_CASE("finite-difference tangent is antisymmetric to truncation order") {
  const model::VehicleParams p;
  const control::ControlGains g;
  const traj::FlatTrajectory flat = default_helix();
  const double h = 1e-4;
  for (double t : {0.8, 2.5, 5.1}) {
    const auto R = [&](double tt) {
      return traj::expand_feedforward(flat, tt, p, g).R_d;
    };
    const Mat3 R_dot = (R(t + h) - R(t - h)) / (2.0 * h);
    const Mat3 m = R(t).transpose() * R_dot;
    CHECK((0.5 * (m + m.transpose())).norm() <= 1e-6);
  }
}

TEST_CASE("thrust-demand bound of the default helix is finite and reported") {
  const model::VehicleParams p;
  const control::ControlGains g;
  const traj::FlatTrajectory flat = default_helix();
  const auto refs = traj::sample_references(flat, p, g, 0.05);
  const auto bound = control::check_trajectory_bound(refs, p, 100.0);
  CHECK(std::isfinite(bound.max_value));
  CHECK(bound.max_value > p.mass * kGravity * 0.99);  // at least near hover
  CHECK(bound.max_value < 10.0);
  CHECK(bound.within);
}

TEST_CASE("expand propagates thrust-direction degeneracy") {
  const model::VehicleParams p;
  const control::ControlGains g;
  // free-falling reference: acceleration cancels gravity
  traj::FlatTrajectory flat;
  flat.eval = [](double) {
    traj::FlatOutputs f;
    f.a = Vec3(0, 0, -kGravity);
    return f;
  };
  RigidBodyState state;
  CHECK_THROWS_AS(traj::expand(flat, 0.0, p, g, state, true),
                  DegeneracyError);
}

TEST_CASE("trajectory file loading") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "quadsim_traj_test.txt";
  {
    std::ofstream out(path);
    out << "kind = helix\nradius = 0.4\nperiod = 5\nclimb_rate = 0\n"
           "z0 = 1.2\nramp = 1.5\nduration = 9\n";
  }
  const traj::FlatTrajectory flat = traj::load_trajectory(path);
  CHECK(flat.horizon == 9.0);
  CHECK(flat.eval(8.0).r.head<2>().norm() == doctest::Approx(0.4));
  {
    std::ofstream out(path);
    out << "kind = spiral\n";
  }
  CHECK_THROWS_AS(traj::load_trajectory(path), ConfigError);
  {
    std::ofstream out(path);
    out << "kind = hover\nz = 2\nbogus = 1\n";
  }
  CHECK_THROWS_AS(traj::load_trajectory(path), ConfigError);
  fs::remove(path);
}

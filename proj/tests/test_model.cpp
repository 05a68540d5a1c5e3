#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "quadsim/errors.hpp"
#include "quadsim/model.hpp"

using namespace quadsim;

namespace {

// independent elementwise evaluation of the thrust/torque combination
model::BodyWrench wrench_oracle(const std::array<double, 4>& pwm,
                                const model::VehicleParams& p) {
  double w[4], f[4];
  for (int i = 0; i < 4; ++i) {
    w[i] = std::max(0.0, p.theta1 + p.theta2 * pwm[i]);
    f[i] = p.thrust_coeff * w[i] * w[i];
  }
  model::BodyWrench out;
  out.thrust = f[0] + f[1] + f[2] + f[3];
  out.torque.x() = p.arm_x * (f[2] + f[3] - f[0] - f[1]);
  out.torque.y() = p.arm_y * (f[1] + f[2] - f[0] - f[3]);
  out.torque.z() =
      p.drag_coeff * (w[0] * w[0] + w[2] * w[2] - w[1] * w[1] - w[3] * w[3]);
  return out;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("default parameters pass validation") {
  model::VehicleParams p;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("parameter invariants are enforced") {
  model::VehicleParams p;
  p.mass = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.inertia(2, 2) = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.pwm0 = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.drag_coeff = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.theta2 = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("pwm_to_angvel clamps below the spin-up threshold") {
  const model::VehicleParams p;
  // at the threshold the line is still marginally negative
  CHECK(model::pwm_to_angvel(0.0305, p) == 0.0);
  CHECK(model::pwm_to_angvel(0.0, p) == 0.0);
  CHECK(model::pwm_to_angvel(1.0, p) ==
        doctest::Approx(4178.632).epsilon(1e-9));
  CHECK_THROWS_AS(model::pwm_to_angvel(-0.01, p), std::invalid_argument);
  CHECK_THROWS_AS(model::pwm_to_angvel(1.01, p), std::invalid_argument);
}

TEST_CASE("angvel_to_thrust is the quadratic law") {
  const model::VehicleParams p;
  CHECK(model::angvel_to_thrust(0.0, p) == 0.0);
  CHECK(model::angvel_to_thrust(1000.0, p) ==
        doctest::Approx(0.93945).epsilon(1e-12));
  // hover balance: the speed that carries a quarter of the weight
  CHECK(model::angvel_to_thrust(1256.7, p) ==
        doctest::Approx(p.mass * kGravity / 4.0).epsilon(1e-3));
  CHECK_THROWS_AS(model::angvel_to_thrust(-1.0, p), std::invalid_argument);
}

TEST_CASE("pwm_to_thrust composes the two maps") {
  const model::VehicleParams p;
  CHECK(model::pwm_to_thrust(0.5, p) == doctest::Approx(3.847).epsilon(2e-4));
  CHECK(model::pwm_to_thrust(p.pwm0, p) == 0.0);
  for (double pwm : {0.0, 0.2, 0.33, 0.7, 1.0}) {
    CHECK(model::pwm_to_thrust(pwm, p) ==
          model::angvel_to_thrust(model::pwm_to_angvel(pwm, p), p));
  }
}

TEST_CASE("quadratic expansion coefficients match the bench fit") {
  const model::VehicleParams p;
  const double c0 = p.thrust_coeff * p.theta1 * p.theta1;
  const double c1 = 2.0 * p.thrust_coeff * p.theta1 * p.theta2;
  const double c2 = p.thrust_coeff * p.theta2 * p.theta2;
  CHECK(c0 == doctest::Approx(0.0163).epsilon(5e-3));
  CHECK(c1 == doctest::Approx(-1.065).epsilon(5e-3));
  CHECK(c2 == doctest::Approx(17.453).epsilon(5e-3));
}

TEST_CASE("pwm_to_thrust is non-decreasing on [0, 1]") {
  const model::VehicleParams p;
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double f = model::pwm_to_thrust(i / 1000.0, p);
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("motors_to_wrench symmetry cases") {
  const model::VehicleParams p;
  model::MotorCommand cmd;
  cmd.pwm = {0.4, 0.4, 0.4, 0.4};
  const model::BodyWrench w = model::motors_to_wrench(cmd, p);
  CHECK(w.torque.norm() == 0.0);
  CHECK(w.thrust == doctest::Approx(4.0 * model::pwm_to_thrust(0.4, p)));

  cmd.pwm = {0.0, 0.0, 0.0, 0.0};
  const model::BodyWrench zero = model::motors_to_wrench(cmd, p);
  CHECK(zero.thrust == 0.0);
  CHECK(zero.torque.norm() == 0.0);
}

TEST_CASE("motors_to_wrench against the scalar oracle") {
  const model::VehicleParams p;
  // differential pair raising motors 3 and 4: positive roll torque, no pitch
  model::MotorCommand cmd;
  cmd.pwm = {0.4, 0.4, 0.45, 0.45};
  const model::BodyWrench w = model::motors_to_wrench(cmd, p);
  CHECK(w.torque.x() > 0.0);
  CHECK(w.torque.y() == doctest::Approx(0.0).epsilon(1e-15));

  std::mt19937 rng(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const std::array<double, 4> pwm{u(rng), u(rng), u(rng), u(rng)};
    model::MotorCommand c;
    c.pwm = pwm;
    const model::BodyWrench got = model::motors_to_wrench(c, p);
    const model::BodyWrench want = wrench_oracle(pwm, p);
    CHECK(got.thrust == doctest::Approx(want.thrust).epsilon(1e-12));
    CHECK((got.torque - want.torque).norm() <= 1e-12);
  }
}

TEST_CASE("drag offset enters only when the plant bias is enabled") {
  const model::VehicleParams p;
  model::MotorCommand cmd;
  cmd.pwm = {0.4, 0.4, 0.4, 0.4};
  const model::BodyWrench nominal = model::motors_to_wrench(cmd, p, false);
  const model::BodyWrench biased = model::motors_to_wrench(cmd, p, true);
  CHECK(nominal.torque.z() == 0.0);
  CHECK(biased.torque.z() == doctest::Approx(p.drag_offset).epsilon(1e-12));
}

TEST_CASE("wrench is linear in the squared propeller speeds") {
  const model::VehicleParams p;
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> u(100.0, 3000.0);
  for (int i = 0; i < 100; ++i) {
    std::array<double, 4> wa{u(rng), u(rng), u(rng), u(rng)};
    std::array<double, 4> wb{u(rng), u(rng), u(rng), u(rng)};
    // combine in squared-speed space: w_c^2 = w_a^2 + 2 w_b^2
    std::array<double, 4> wc{};
    for (int m = 0; m < 4; ++m) {
      wc[m] = std::sqrt(wa[m] * wa[m] + 2.0 * wb[m] * wb[m]);
    }
    const auto A = model::wrench_from_angvels(wa, p);
    const auto B = model::wrench_from_angvels(wb, p);
    const auto C = model::wrench_from_angvels(wc, p);
    CHECK(C.thrust == doctest::Approx(A.thrust + 2.0 * B.thrust).epsilon(1e-9));
    CHECK((C.torque - (A.torque + 2.0 * B.torque)).norm() <=
          1e-9 * (1.0 + C.torque.norm()));
  }
}

TEST_CASE("allocate: hover wrench splits evenly") {
  const model::VehicleParams p;
  model::BodyWrench w;
  w.thrust = p.mass * kGravity;
  const model::AllocationResult res = model::allocate(w, p);
  CHECK_FALSE(res.saturated);
  for (int i = 1; i < 4; ++i) {
    CHECK(res.command.pwm[i] == doctest::Approx(res.command.pwm[0]).epsilon(1e-15));
  }
  CHECK(model::pwm_to_thrust(res.command.pwm[0], p) ==
        doctest::Approx(p.mass * kGravity / 4.0).epsilon(1e-12));
}

TEST_CASE("allocate: zero wrench commands zero thrust") {
  const model::VehicleParams p;
  const model::AllocationResult res = model::allocate({}, p);
  for (double pwm : res.command.pwm) {
    CHECK(pwm <= p.pwm0 + 1e-12);
    CHECK(model::pwm_to_thrust(pwm, p) == 0.0);
  }
}

TEST_CASE("allocate round-trips random feasible wrenches") {
  const model::VehicleParams p;
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int i = 0; i < 1000; ++i) {
    model::MotorCommand cmd;
    for (double& x : cmd.pwm) x = u(rng);
    const model::BodyWrench w = model::motors_to_wrench(cmd, p);
    const model::AllocationResult res = model::allocate(w, p);
    CHECK_FALSE(res.saturated);
    const model::BodyWrench back = model::motors_to_wrench(res.command, p);
    CHECK(std::abs(back.thrust - w.thrust) <= 1e-9);
    CHECK((back.torque - w.torque).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("allocate inverts motor commands above the threshold") {
  const model::VehicleParams p;
  std::mt19937 rng(67);
  std::uniform_real_distribution<double> u(p.pwm0 + 1e-3, 1.0 - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    model::MotorCommand cmd;
    for (double& x : cmd.pwm) x = u(rng);
    bool spinning = true;
    for (double x : cmd.pwm) spinning &= model::pwm_to_angvel(x, p) > 0.0;
    if (!spinning) continue;
    const model::AllocationResult res =
        model::allocate(model::motors_to_wrench(cmd, p), p);
    for (int m = 0; m < 4; ++m) {
      CHECK(std::abs(res.command.pwm[m] - cmd.pwm[m]) <= 1e-9);
    }
  }
}

TEST_CASE("allocate reports saturation") {
  const model::VehicleParams p;
  model::BodyWrench w;
  w.thrust = -1.0;  // infeasible collective thrust
  CHECK(model::allocate(w, p).saturated);
  w.thrust = 1000.0;  // beyond full throttle
  CHECK(model::allocate(w, p).saturated);
  CHECK_THROWS_AS(
      model::allocate({std::nan(""), Vec3::Zero()}, p),
      std::invalid_argument);
}

TEST_CASE("parameter file round trip") {
  model::VehicleParams p;
  p.mass = 0.7;
  p.inertia(0, 1) = p.inertia(1, 0) = 1e-6;
  p.thrust_coeff = 1.1e-6;
  const auto path = temp_file("quadsim_params_roundtrip.txt");
  model::save_params(p, path);
  const model::VehicleParams q = model::load_params(path);
  CHECK(q.mass == p.mass);
  CHECK((q.inertia - p.inertia).norm() == 0.0);
  CHECK(q.thrust_coeff == p.thrust_coeff);
  CHECK(q.theta1 == p.theta1);
  std::filesystem::remove(path);
}

TEST_CASE("parameter file accepts inertia in kg mm^2") {
  const auto path = temp_file("quadsim_params_kgmm2.txt");
  std::ofstream out(path);
  out << "mass = 0.605\n"
         "inertia_units = kgmm2\n"
         "inertia_xx = 1590.5\n"
         "inertia_yy = 1481.3\n"
         "inertia_zz = 2768.4\n"
         "arm_x = 0.0884\n"
         "arm_y = 0.0884\n"
         "thrust_coeff = 9.3945e-7\n"
         "drag_coeff = 5.5939e-7\n"
         "drag_offset = -0.4785\n"
         "theta1 = -131.538\n"
         "theta2 = 4310.17\n"
         "pwm0 = 0.0305\n"
         "u_max = 16.8\n";
  out.close();
  const model::VehicleParams p = model::load_params(path);
  CHECK(p.inertia(0, 0) == doctest::Approx(1.5905e-3).epsilon(1e-12));
  CHECK(p.inertia(2, 2) == doctest::Approx(2.7684e-3).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("parameter file rejects unknown keys and missing files") {
  const auto path = temp_file("quadsim_params_bad.txt");
  std::ofstream out(path);
  out << "mass = 0.605\nnot_a_key = 1\n";
  out.close();
  CHECK_THROWS_AS(model::load_params(path), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(model::load_params(temp_file("quadsim_no_such_file.txt")),
                  ConfigError);
}

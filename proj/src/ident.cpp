#include "quadsim/ident.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "quadsim/errors.hpp"
#include "quadsim/harness.hpp"

namespace quadsim::ident {

ActuatorLine actuator_line_from_kv(double kv_rpm_per_volt, double u_max,
                                   double pwm0) {
  if (!(kv_rpm_per_volt > 0.0) || !(u_max > 0.0)) {
    throw std::invalid_argument("actuator_line_from_kv: kv and u_max > 0");
  }
  if (!(pwm0 >= 0.0 && pwm0 < 1.0)) {
    throw std::invalid_argument("actuator_line_from_kv: pwm0 in [0, 1)");
  }
  ActuatorLine line;
  line.theta2 = kv_rpm_per_volt * (2.0 * std::numbers::pi / 60.0) * u_max;
  line.theta1 = -pwm0 * line.theta2;
  return line;
}

ThrustFit fit_thrust_coeff(std::span<const ThrustSample> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("fit_thrust_coeff: no samples");
  }
  double sum_w2f = 0.0, sum_w4 = 0.0;
  for (const ThrustSample& s : samples) {
    const double w2 = s.omega_mean * s.omega_mean;
    sum_w2f += w2 * s.thrust;
    sum_w4 += w2 * w2;
  }
  if (!(sum_w4 > 0.0)) {
    throw std::invalid_argument(
        "fit_thrust_coeff: all sample speeds are zero");
  }
  ThrustFit fit;
  fit.thrust_coeff = sum_w2f / sum_w4;
  fit.n = static_cast<int>(samples.size());
  double sum_r2 = 0.0;
  for (const ThrustSample& s : samples) {
    const double r =
        s.thrust - fit.thrust_coeff * s.omega_mean * s.omega_mean;
    sum_r2 += r * r;
  }
  fit.residual_rms = std::sqrt(sum_r2 / fit.n);
  return fit;
}

LineFit fit_drag_coeff(std::span<const TorqueSample> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit_drag_coeff: need at least two samples");
  }
  const double n = static_cast<double>(samples.size());
  double sum_x = 0.0, sum_y = 0.0;
  for (const TorqueSample& s : samples) {
    sum_x += s.sq_diff;
    sum_y += s.tau_z;
  }
  const double mean_x = sum_x / n, mean_y = sum_y / n;
  double sxx = 0.0, sxy = 0.0;
  for (const TorqueSample& s : samples) {
    sxx += (s.sq_diff - mean_x) * (s.sq_diff - mean_x);
    sxy += (s.sq_diff - mean_x) * (s.tau_z - mean_y);
  }
  // degenerate design: no spread relative to the data scale
  double max_abs_x = 0.0;
  for (const TorqueSample& s : samples) {
    max_abs_x = std::max(max_abs_x, std::abs(s.sq_diff));
  }
  if (sxx <= 1e-24 * std::max(1.0, max_abs_x * max_abs_x)) {
    throw std::invalid_argument(
        "fit_drag_coeff: sq_diff values have no spread");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  fit.n = static_cast<int>(samples.size());
  double sum_r2 = 0.0;
  for (const TorqueSample& s : samples) {
    const double r = s.tau_z - (fit.slope * s.sq_diff + fit.intercept);
    sum_r2 += r * r;
  }
  fit.residual_rms = std::sqrt(sum_r2 / n);
  return fit;
}

std::vector<ThrustSample> gen_hover_experiment(
    std::span<const double> payloads, const model::VehicleParams& params,
    const control::ControlGains& gains, const HoverExperimentConfig& config) {
  const double max_thrust = 4.0 * model::pwm_to_thrust(1.0, params);
  std::vector<ThrustSample> samples;
  samples.reserve(payloads.size());
  for (double payload : payloads) {
    if (!(payload >= 0.0)) {
      throw std::invalid_argument("gen_hover_experiment: negative payload");
    }
    model::VehicleParams loaded = params;
    loaded.mass = params.mass + payload;
    const double weight = loaded.mass * kGravity;
    if (weight >= max_thrust) {
      char buf[96];
      std::snprintf(buf, sizeof(buf),
                    "gen_hover_experiment: payload %.3f kg is not liftable",
                    payload);
      throw std::invalid_argument(buf);
    }

    sim::SimConfig sc;
    sc.dt = config.dt;
    sc.control_period = config.control_period;
    sc.duration = config.duration;
    sc.initial.r = config.r0;
    const sim::SimLog log = harness::run_tracking(
        sc, loaded, gains, traj::hover(config.r0, 0.0));

    double pwm_sum = 0.0;
    long long count = 0;
    for (const sim::LogRow& row : log.rows) {
      if (row.t < config.duration - config.window) continue;
      for (double p : row.pwm.pwm) pwm_sum += p;
      count += 4;
    }
    if (count == 0) {
      throw std::invalid_argument(
          "gen_hover_experiment: averaging window is empty");
    }
    ThrustSample s;
    s.omega_mean = model::pwm_to_angvel(pwm_sum / count, loaded);
    s.thrust = weight / 4.0;
    samples.push_back(s);
  }
  return samples;
}

ScaleExperiment gen_scale_experiment(std::span<const double> pwm_levels,
                                     const model::VehicleParams& params) {
  ScaleExperiment out;
  const double weight = params.mass * kGravity;
  for (double pwm : pwm_levels) {
    const double f = model::pwm_to_thrust(pwm, params);
    if (4.0 * f >= weight) {
      char buf[96];
      std::snprintf(buf, sizeof(buf),
                    "gen_scale_experiment: pwm %.4g lifts off the scale", pwm);
      throw std::invalid_argument(buf);
    }
    ThrustSample s;
    s.omega_mean = model::pwm_to_angvel(pwm, params);
    const double scale_mass = params.mass - 4.0 * f / kGravity;
    s.thrust = (params.mass - scale_mass) * kGravity / 4.0;
    out.samples.push_back(s);
    out.scale_mass.push_back(scale_mass);
  }
  return out;
}

std::vector<TorqueSample> gen_yaw_experiment(
    const YawExperimentConfig& config, const model::VehicleParams& params,
    const control::ControlGains& gains) {
  const traj::FlatTrajectory flat =
      traj::yaw_bangbang(config.maneuver, config.r0);

  sim::SimConfig sc;
  sc.dt = config.dt;
  sc.control_period = config.control_period;
  sc.duration = config.maneuver.duration;
  sc.mode = sim::Mode::kAttitudeOnly;
  sc.plant_bias_b2 = config.plant_bias;
  sc.initial.r = config.r0;

  RigidBodyState state0 = sc.initial;
  const control::StateReference ref0 =
      traj::expand(flat, 0.0, params, gains, state0, true);
  const control::InitialCheck check =
      control::check_initial_conditions(state0, ref0, params, gains, 0.9);
  if (!check.ok) {
    throw std::invalid_argument(
        "gen_yaw_experiment: initial conditions fail the convergence check");
  }

  const sim::SimLog log = harness::run_tracking(sc, params, gains, flat);
  const std::size_t n = log.rows.size();
  if (n < 3) {
    throw std::invalid_argument("gen_yaw_experiment: run too short");
  }

  // gyro trace: true body yaw rate plus optional measurement noise
  std::vector<double> gyro_z(n);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    gyro_z[i] = log.rows[i].state.omega.z();
    if (config.gyro_noise_std > 0.0) {
      gyro_z[i] += config.gyro_noise_std * gauss(rng);
    }
  }

  const double tick = config.control_period;
  const double half = 0.5 * config.maneuver.duration;
  const double j_zz = params.inertia(2, 2);
  std::vector<TorqueSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = log.rows[i].t;
    // drop the settling window after each acceleration switch
    if (t < config.settle_skip) continue;
    if (t >= half && t < half + config.settle_skip) continue;

    double omega_dot = 0.0;
    if (i == 0) {
      omega_dot = (gyro_z[1] - gyro_z[0]) / tick;
    } else if (i == n - 1) {
      omega_dot = (gyro_z[n - 1] - gyro_z[n - 2]) / tick;
    } else {
      omega_dot = (gyro_z[i + 1] - gyro_z[i - 1]) / (2.0 * tick);
    }

    std::array<double, 4> w{};
    for (int m = 0; m < 4; ++m) {
      w[m] = model::pwm_to_angvel(log.rows[i].pwm.pwm[m], params);
    }
    TorqueSample s;
    s.sq_diff = 0.0;
    for (int m = 0; m < 4; ++m) {
      s.sq_diff += model::kYawSign[m] * w[m] * w[m];
    }
    s.tau_z = j_zz * omega_dot;
    samples.push_back(s);
  }
  return samples;
}

double full_attitude_residual(const RigidBodyState& state,
                              const model::VehicleParams& params) {
  const Mat3& j = params.inertia;
  const double wx = state.omega.x(), wy = state.omega.y(),
               wz = state.omega.z();
  return j(1, 0) * wx * wx + j(1, 1) * wx * wy + j(1, 2) * wx * wz -
         j(0, 0) * wx * wy - j(0, 1) * wy * wy - j(0, 2) * wy * wz;
}

namespace {

void write_two_column(const std::filesystem::path& path, const char* header,
                      std::span<const std::pair<double, double>> rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << header << '\n';
  char buf[80];
  for (const auto& [a, b] : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", a, b);
    out << buf;
  }
}

std::vector<std::pair<double, double>> read_two_column(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError(path.string() + ": row " + std::to_string(lineno) +
                        ": expected two comma-separated columns");
    }
    try {
      std::size_t ua = 0, ub = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      const double va = std::stod(a, &ua);
      const double vb = std::stod(b, &ub);
      if (ua != a.size() || ub != b.size()) throw std::invalid_argument("");
      rows.emplace_back(va, vb);
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header line
      throw ConfigError(path.string() + ": row " + std::to_string(lineno) +
                        ": bad numeric field");
    }
  }
  if (rows.empty()) {
    throw ConfigError(path.string() + ": no samples");
  }
  return rows;
}

}  // namespace

void write_thrust_samples(std::span<const ThrustSample> samples,
                          const std::filesystem::path& path) {
  std::vector<std::pair<double, double>> rows;
  rows.reserve(samples.size());
  for (const ThrustSample& s : samples) rows.emplace_back(s.omega_mean, s.thrust);
  write_two_column(path, "omega_mean,thrust", rows);
}

std::vector<ThrustSample> read_thrust_samples(
    const std::filesystem::path& path) {
  std::vector<ThrustSample> samples;
  for (const auto& [a, b] : read_two_column(path)) {
    samples.push_back({a, b});
  }
  return samples;
}

void write_torque_samples(std::span<const TorqueSample> samples,
                          const std::filesystem::path& path) {
  std::vector<std::pair<double, double>> rows;
  rows.reserve(samples.size());
  for (const TorqueSample& s : samples) rows.emplace_back(s.sq_diff, s.tau_z);
  write_two_column(path, "sq_diff,tau_z", rows);
}

std::vector<TorqueSample> read_torque_samples(
    const std::filesystem::path& path) {
  std::vector<TorqueSample> samples;
  for (const auto& [a, b] : read_two_column(path)) {
    samples.push_back({a, b});
  }
  return samples;
}

}  // namespace quadsim::ident

#include "quadsim/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "quadsim/errors.hpp"
#include "quadsim/keyvalue.hpp"
#include "quadsim/so3.hpp"

namespace quadsim::sim {
namespace {

constexpr double kDivergenceLimit = 1e6;

void check_finite_and_bounded(const RigidBodyState& s) {
  const double worst =
      std::max({s.r.cwiseAbs().maxCoeff(), s.v.cwiseAbs().maxCoeff(),
                s.omega.cwiseAbs().maxCoeff()});
  if (!std::isfinite(worst) || worst > kDivergenceLimit || !s.R.allFinite()) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "state diverged (max component %.3e)",
                  worst);
    throw DivergenceError(buf);
  }
}

struct RawDerivative {
  Vec3 r_dot, v_dot, omega_dot;
  Mat3 R_dot;
};

RawDerivative rhs(const Vec3& v, const Mat3& R, const Vec3& omega,
                  const model::BodyWrench& w,
                  const model::VehicleParams& p, const Mat3& inertia_inv) {
  RawDerivative d;
  d.r_dot = v;
  d.v_dot = -kGravity * e3() + (w.thrust / p.mass) * (R * e3());
  d.omega_dot = inertia_inv * (w.torque - omega.cross(p.inertia * omega));
  d.R_dot = R * so3::hat(omega);
  return d;
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0 && dt <= 0.01)) {
    throw ConfigError("sim: dt must lie in (0, 0.01] s");
  }
  if (!(duration > 0.0)) throw ConfigError("sim: duration must be positive");
  const double ratio = control_period / dt;
  const auto steps = static_cast<long long>(std::llround(ratio));
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9) {
    throw ConfigError(
        "sim: control_period must be a positive integer multiple of dt");
  }
}

StateDerivative derivatives(const RigidBodyState& state,
                            const model::BodyWrench& wrench,
                            const model::VehicleParams& params) {
  const Mat3 inertia_inv = params.inertia.inverse();
  const RawDerivative d =
      rhs(state.v, state.R, state.omega, wrench, params, inertia_inv);
  return {d.r_dot, d.v_dot, d.R_dot, d.omega_dot};
}

RigidBodyState step(const RigidBodyState& state,
                    const model::BodyWrench& wrench,
                    const model::VehicleParams& params, double dt, Mode mode) {
  if (!(dt > 0.0 && dt <= 0.01)) {
    throw std::invalid_argument("step: dt must lie in (0, 0.01] s");
  }
  const Mat3 inertia_inv = params.inertia.inverse();

  const auto f = [&](const Vec3& v, const Mat3& R, const Vec3& w) {
    return rhs(v, R, w, wrench, params, inertia_inv);
  };

  const RawDerivative k1 = f(state.v, state.R, state.omega);
  const RawDerivative k2 = f(state.v + 0.5 * dt * k1.v_dot,
                             state.R + 0.5 * dt * k1.R_dot,
                             state.omega + 0.5 * dt * k1.omega_dot);
  const RawDerivative k3 = f(state.v + 0.5 * dt * k2.v_dot,
                             state.R + 0.5 * dt * k2.R_dot,
                             state.omega + 0.5 * dt * k2.omega_dot);
  const RawDerivative k4 = f(state.v + dt * k3.v_dot, state.R + dt * k3.R_dot,
                             state.omega + dt * k3.omega_dot);

  RigidBodyState next = state;
  if (mode == Mode::kFull) {
    next.r = state.r + dt / 6.0 *
                           (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot +
                            k4.r_dot);
    next.v = state.v + dt / 6.0 *
                           (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot +
                            k4.v_dot);
  }
  next.omega = state.omega + dt / 6.0 *
                                 (k1.omega_dot + 2.0 * k2.omega_dot +
                                  2.0 * k3.omega_dot + k4.omega_dot);
  const Mat3 R_raw = state.R + dt / 6.0 *
                                   (k1.R_dot + 2.0 * k2.R_dot +
                                    2.0 * k3.R_dot + k4.R_dot);
  next.R = so3::reorthonormalize(R_raw);
  check_finite_and_bounded(next);
  return next;
}

SimLog run(const SimConfig& config, const ControllerFn& controller,
           const model::VehicleParams& params) {
  config.validate();
  params.validate();
  const auto steps_per_tick =
      static_cast<int>(std::llround(config.control_period / config.dt));
  const auto n_ticks = static_cast<long long>(
      std::floor(config.duration / config.control_period + 1e-9));

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const bool pos_noise = config.pos_noise_std > 0.0;
  const bool att_noise = config.att_noise_std > 0.0;

  SimLog log;
  log.rows.reserve(static_cast<std::size_t>(n_ticks));
  RigidBodyState state = config.initial;

  for (long long k = 0; k < n_ticks; ++k) {
    const double t = static_cast<double>(k) * config.control_period;

    RigidBodyState measured = state;
    if (pos_noise) {
      for (int i = 0; i < 3; ++i) {
        measured.r[i] += config.pos_noise_std * gauss(rng);
      }
    }
    if (att_noise) {
      Vec3 da;
      for (int i = 0; i < 3; ++i) da[i] = config.att_noise_std * gauss(rng);
      measured.R = measured.R * so3::exp(da);
    }

    const ControlTick tick = controller(t, measured);
    const model::BodyWrench applied =
        model::motors_to_wrench(tick.pwm, params, config.plant_bias_b2);

    LogRow row;
    row.t = t;
    row.state = state;
    row.wrench = applied;
    row.pwm = tick.pwm;
    row.ref_r = tick.ref.r_d;
    row.ref_v = tick.ref.v_d;
    row.ref_yaw = tick.ref.yaw_d;
    row.errors = tick.errors;
    log.rows.push_back(row);

    try {
      for (int j = 0; j < steps_per_tick; ++j) {
        state = step(state, applied, params, config.dt, config.mode);
      }
    } catch (const DivergenceError& e) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "tick %lld: ", k);
      throw DivergenceError(std::string(buf) + e.what());
    }
  }
  return log;
}

const char* SimLog::csv_header() {
  return "t,rx,ry,rz,vx,vy,vz,"
         "R11,R12,R13,R21,R22,R23,R31,R32,R33,"
         "wx,wy,wz,pwm1,pwm2,pwm3,pwm4,F,taux,tauy,tauz,"
         "ref_x,ref_y,ref_z,ref_vx,ref_vy,ref_vz,ref_yaw,"
         "erx,ery,erz,evx,evy,evz,eRx,eRy,eRz,ewx,ewy,ewz";
}

void SimLog::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  char buf[32];
  const auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out << buf << sep;
  };
  for (const LogRow& row : rows) {
    put(row.t, ',');
    for (int i = 0; i < 3; ++i) put(row.state.r[i], ',');
    for (int i = 0; i < 3; ++i) put(row.state.v[i], ',');
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) put(row.state.R(i, j), ',');
    for (int i = 0; i < 3; ++i) put(row.state.omega[i], ',');
    for (int i = 0; i < 4; ++i) put(row.pwm.pwm[i], ',');
    put(row.wrench.thrust, ',');
    for (int i = 0; i < 3; ++i) put(row.wrench.torque[i], ',');
    for (int i = 0; i < 3; ++i) put(row.ref_r[i], ',');
    for (int i = 0; i < 3; ++i) put(row.ref_v[i], ',');
    put(row.ref_yaw, ',');
    for (int i = 0; i < 3; ++i) put(row.errors.e_r[i], ',');
    for (int i = 0; i < 3; ++i) put(row.errors.e_v[i], ',');
    for (int i = 0; i < 3; ++i) put(row.errors.e_R[i], ',');
    for (int i = 0; i < 3; ++i)
      put(row.errors.e_omega[i], i == 2 ? '\n' : ',');
  }
}

void SimLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  write_csv(out);
}

SimLog SimLog::read_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError(name + ": empty log");
  }
  if (line != csv_header()) {
    throw ConfigError(name + ": row 1: unexpected header");
  }
  SimLog log;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 46> f{};
    std::size_t pos = 0;
    for (int i = 0; i < 46; ++i) {
      const std::size_t next = line.find(',', pos);
      const std::string field = line.substr(
          pos, next == std::string::npos ? std::string::npos : next - pos);
      std::size_t used = 0;
      try {
        f[i] = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size() || field.empty()) {
        throw ConfigError(name + ": row " + std::to_string(lineno) +
                          ": bad field " + std::to_string(i + 1));
      }
      if (next == std::string::npos) {
        if (i != 45) {
          throw ConfigError(name + ": row " + std::to_string(lineno) +
                            ": expected 46 columns");
        }
        pos = line.size();
      } else {
        pos = next + 1;
      }
    }
    LogRow row;
    int c = 0;
    row.t = f[c++];
    for (int i = 0; i < 3; ++i) row.state.r[i] = f[c++];
    for (int i = 0; i < 3; ++i) row.state.v[i] = f[c++];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) row.state.R(i, j) = f[c++];
    for (int i = 0; i < 3; ++i) row.state.omega[i] = f[c++];
    for (int i = 0; i < 4; ++i) row.pwm.pwm[i] = f[c++];
    row.wrench.thrust = f[c++];
    for (int i = 0; i < 3; ++i) row.wrench.torque[i] = f[c++];
    for (int i = 0; i < 3; ++i) row.ref_r[i] = f[c++];
    for (int i = 0; i < 3; ++i) row.ref_v[i] = f[c++];
    row.ref_yaw = f[c++];
    for (int i = 0; i < 3; ++i) row.errors.e_r[i] = f[c++];
    for (int i = 0; i < 3; ++i) row.errors.e_v[i] = f[c++];
    for (int i = 0; i < 3; ++i) row.errors.e_R[i] = f[c++];
    for (int i = 0; i < 3; ++i) row.errors.e_omega[i] = f[c++];
    log.rows.push_back(row);
  }
  if (log.rows.empty()) {
    throw ConfigError(name + ": empty log");
  }
  return log;
}

SimLog SimLog::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  return read_csv(in, path.string());
}

SimConfig load_config(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  SimConfig c = config_from_kv(kv);
  kv.reject_unknown_keys();
  return c;
}

SimConfig config_from_kv(const KeyValueFile& kv) {
  SimConfig c;
  c.dt = kv.number_or("dt", c.dt);
  c.duration = kv.number_or("duration", c.duration);
  c.control_period = kv.number_or("control_period", c.control_period);
  const std::string mode = kv.text_or("mode", "full");
  if (mode == "full") {
    c.mode = Mode::kFull;
  } else if (mode == "attitude_only") {
    c.mode = Mode::kAttitudeOnly;
  } else {
    throw ConfigError("sim: mode must be full or attitude_only");
  }
  c.plant_bias_b2 = kv.number_or("plant_bias_b2", 0.0) != 0.0;
  c.initial.r = Vec3(kv.number_or("r0_x", 0.0), kv.number_or("r0_y", 0.0),
                     kv.number_or("r0_z", 1.0));
  c.initial.v = Vec3(kv.number_or("v0_x", 0.0), kv.number_or("v0_y", 0.0),
                     kv.number_or("v0_z", 0.0));
  c.initial.R = so3::euler_to_rotation({kv.number_or("roll0", 0.0),
                                        kv.number_or("pitch0", 0.0),
                                        kv.number_or("yaw0", 0.0)});
  c.initial.omega =
      Vec3(kv.number_or("omega0_x", 0.0), kv.number_or("omega0_y", 0.0),
           kv.number_or("omega0_z", 0.0));
  c.pos_noise_std = kv.number_or("pos_noise_std", 0.0);
  c.att_noise_std = kv.number_or("att_noise_std", 0.0);
  c.seed = static_cast<std::uint64_t>(kv.number_or("seed", 0.0));
  c.validate();
  return c;
}

}  // namespace quadsim::sim

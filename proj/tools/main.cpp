// Command-line front end: closed-loop simulation, gain sweeps with RMS
// reports, parameter-identification runs and plot-ready CSV export.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "quadsim/errors.hpp"
#include "quadsim/harness.hpp"
#include "quadsim/ident.hpp"
#include "quadsim/keyvalue.hpp"
#include "quadsim/sim.hpp"
#include "quadsim/so3.hpp"
#include "quadsim/trajectory.hpp"

namespace fs = std::filesystem;
using namespace quadsim;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct CommonOptions {
  std::string params_path;
  std::string gains_path;
  std::string traj_path;
  std::string out_dir = "out/run";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOptions* opts, bool with_gains = true) {
  cmd->add_option("--params", opts->params_path,
                  "vehicle parameter file (defaults built in)");
  if (with_gains) {
    cmd->add_option("--gains", opts->gains_path,
                    "controller gains file (defaults built in)");
  }
  cmd->add_option("--traj", opts->traj_path,
                  "trajectory file (default: hover at [0 0 1])");
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--seed", opts->seed, "seed for the noise hooks");
}

model::VehicleParams load_params_or_default(const std::string& path) {
  if (path.empty()) {
    model::VehicleParams p;
    p.validate();
    return p;
  }
  return model::load_params(path);
}

control::ControlGains load_gains_or_default(const std::string& path) {
  if (path.empty()) {
    control::ControlGains g;
    g.validate();
    return g;
  }
  return control::load_gains(path);
}

traj::FlatTrajectory load_traj_or_default(const std::string& path) {
  if (path.empty()) {
    traj::FlatTrajectory flat = traj::hover(Vec3(0, 0, 1), 0.0);
    flat.horizon = 10.0;
    return flat;
  }
  return traj::load_trajectory(path);
}

// Max thrust-vector demand along the reference (feasibility bound input).
control::BoundCheck reference_bound(const traj::FlatTrajectory& flat,
                                    const model::VehicleParams& params,
                                    double duration, double spacing,
                                    double B) {
  std::vector<control::StateReference> refs;
  for (double t = 0.0; t <= duration; t += spacing) {
    control::StateReference ref;
    const traj::FlatOutputs f = flat.eval(t);
    ref.r_d = f.r;
    ref.v_d = f.v;
    ref.a_d = f.a;
    refs.push_back(ref);
  }
  return control::check_trajectory_bound(refs, params, B);
}

int cmd_simulate(const CommonOptions& opts, const std::string& config_path) {
  model::VehicleParams params;
  control::ControlGains gains;
  traj::FlatTrajectory flat;
  sim::SimConfig config;
  double bound_B = 0.0;  // 0 = report-only
  double psi1 = 0.9;
  std::optional<KeyValueFile> kv;
  try {
    params = load_params_or_default(opts.params_path);
    gains = load_gains_or_default(opts.gains_path);
    flat = load_traj_or_default(opts.traj_path);
    if (!config_path.empty()) {
      kv = KeyValueFile::load(config_path);
      config = sim::config_from_kv(*kv);
      bound_B = kv->number_or("bound_B", 0.0);
      psi1 = kv->number_or("psi1", 0.9);
    }
    if (flat.horizon > 0.0 && config_path.empty()) {
      config.duration = flat.horizon;
    }
    // start on the reference unless the config pins the initial state
    const traj::FlatOutputs start = flat.eval(0.0);
    if (!kv || !(kv->has("r0_x") || kv->has("r0_y") || kv->has("r0_z"))) {
      config.initial.r = start.r;
    }
    if (!kv || !(kv->has("v0_x") || kv->has("v0_y") || kv->has("v0_z"))) {
      config.initial.v = start.v;
    }
    if (!kv || !(kv->has("roll0") || kv->has("pitch0") || kv->has("yaw0"))) {
      config.initial.R = so3::euler_to_rotation({0.0, 0.0, start.yaw});
    }
    if (kv) kv->reject_unknown_keys();
    if (opts.seed != 0) config.seed = opts.seed;
    config.validate();
    fs::create_directories(opts.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    // convergence preconditions at the initial state; warn but proceed
    const control::StateReference ref0 =
        traj::expand(flat, 0.0, params, gains, config.initial, true);
    const control::InitialCheck init_check =
        control::check_initial_conditions(config.initial, ref0, params, gains,
                                          psi1);
    if (!init_check.ok) {
      std::cerr << "warning: initial-condition check failed (psi = "
                << fmt(init_check.psi) << ", |e_omega|^2 = "
                << fmt(init_check.e_omega_sq) << " vs bound "
                << fmt(init_check.omega_bound) << "); run proceeds\n";
    }

    const sim::SimLog log = harness::run_tracking(config, params, gains, flat);
    log.write_csv(fs::path(opts.out_dir) / "log.csv");

    double max_pos_err = 0.0;
    for (const sim::LogRow& row : log.rows) {
      max_pos_err = std::max(max_pos_err, row.errors.e_r.norm());
    }
    const auto axis_rms = harness::position_rms(log, 0.0);
    const control::BoundCheck bound = reference_bound(
        flat, params, config.duration, config.control_period,
        bound_B > 0.0 ? bound_B : 1e12);

    std::ofstream summary(fs::path(opts.out_dir) / "summary.txt");
    summary << "ticks = " << log.rows.size() << "\n"
            << "dt = " << fmt(config.dt) << "\n"
            << "control_period = " << fmt(config.control_period) << "\n"
            << "mode = "
            << (config.mode == sim::Mode::kFull ? "full" : "attitude_only")
            << "\n"
            << "max_pos_error = " << fmt(max_pos_err) << "\n"
            << "final_pos_error = " << fmt(log.rows.back().errors.e_r.norm())
            << "\n"
            << "rms_x = " << fmt(axis_rms[0]) << "\n"
            << "rms_y = " << fmt(axis_rms[1]) << "\n"
            << "rms_z = " << fmt(axis_rms[2]) << "\n"
            << "thrust_demand_max = " << fmt(bound.max_value) << "\n";
    if (bound_B > 0.0) {
      summary << "thrust_demand_bound = " << fmt(bound_B) << "\n"
              << "thrust_demand_ok = " << (bound.within ? "yes" : "no")
              << "\n";
    }
    summary << "initial_check = " << (init_check.ok ? "pass" : "fail") << "\n"
            << "initial_psi = " << fmt(init_check.psi) << "\n";
    std::cout << "wrote " << (fs::path(opts.out_dir) / "log.csv").string()
              << " (" << log.rows.size() << " ticks, max |e_r| = "
              << fmt(max_pos_err) << " m)\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_sweep(const CommonOptions& opts, const std::string& sweep_path,
              int jobs) {
  model::VehicleParams params;
  traj::FlatTrajectory flat;
  harness::SweepSpec spec;
  try {
    params = load_params_or_default(opts.params_path);
    spec = harness::load_sweep(sweep_path);
    flat = opts.traj_path.empty()
               ? traj::helix(0.5, 4.0, 0.1, 1.0, 2.0, spec.sim.duration)
               : traj::load_trajectory(opts.traj_path);
    if (opts.seed != 0) spec.sim.seed = opts.seed;
    fs::create_directories(opts.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const fs::path out_dir(opts.out_dir);
    const auto sink = [&](int index, const sim::SimLog& log) {
      char name[64];
      std::snprintf(name, sizeof(name), "run_kr%g_kv%g",
                    spec.pairs[index].first, spec.pairs[index].second);
      fs::create_directories(out_dir / name);
      log.write_csv(out_dir / name / "log.csv");
    };
    const harness::SweepResult result =
        harness::run_sweep(spec, params, flat, jobs, sink);
    harness::write_report_csv(result, out_dir / "report.csv");

    std::ofstream summary(out_dir / "summary.txt");
    summary << "runs = " << spec.pairs.size() << "\n"
            << "completed = " << result.rows.size() << "\n"
            << "rms_window_start = " << fmt(spec.rms_skip) << "\n";
    for (const harness::RmsRow& row : result.rows) {
      summary << "rms k_r=" << fmt(row.k_r) << " k_v=" << fmt(row.k_v)
              << " -> " << fmt(row.rms_x) << " " << fmt(row.rms_y) << " "
              << fmt(row.rms_z) << (row.best ? " best" : "") << "\n";
    }
    for (const std::string& failure : result.failures) {
      summary << "failed " << failure << "\n";
    }
    if (result.argmin_index >= 0) {
      const harness::RmsRow& best = result.rows[result.argmin_index];
      std::cout << "best gains: k_r = " << fmt(best.k_r)
                << ", k_v = " << fmt(best.k_v) << " (rms "
                << fmt(best.rms_x) << ", " << fmt(best.rms_y) << ", "
                << fmt(best.rms_z) << ")\n";
    }
    for (const std::string& failure : result.failures) {
      std::cerr << "error: " << failure << "\n";
    }
    return result.failures.empty() ? 0 : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

struct IdentifyOptions {
  std::string kind;
  std::string input_path;
  std::vector<double> payloads{0.0, 0.1, 0.2, 0.25};
  std::vector<double> pwm_levels{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  double alpha = 2.0;
  double maneuver_T = 2.0;
  double noise = 0.01;
  bool bias = false;
  double kv_rating = 2450.0;
  double u_max = 16.8;
  double pwm0 = 0.0305;
};

int cmd_identify(const CommonOptions& opts, const IdentifyOptions& id) {
  model::VehicleParams params;
  control::ControlGains gains;
  try {
    params = load_params_or_default(opts.params_path);
    gains = load_gains_or_default(opts.gains_path);
    fs::create_directories(opts.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    model::VehicleParams fitted = params;
    std::ofstream summary(fs::path(opts.out_dir) / "summary.txt");

    if (id.kind == "actuator-line") {
      const ident::ActuatorLine line =
          ident::actuator_line_from_kv(id.kv_rating, id.u_max, id.pwm0);
      fitted.theta1 = line.theta1;
      fitted.theta2 = line.theta2;
      fitted.pwm0 = id.pwm0;
      fitted.u_max = id.u_max;
      std::cout << "theta2 = " << fmt(line.theta2)
                << " rad/s per pwm, theta1 = " << fmt(line.theta1)
                << " rad/s\n";
      summary << "kind = actuator-line\ntheta1 = " << fmt(line.theta1)
              << "\ntheta2 = " << fmt(line.theta2) << "\n";
    } else if (id.kind == "thrust-hover" || id.kind == "thrust-scale") {
      std::vector<ident::ThrustSample> samples;
      if (!id.input_path.empty()) {
        samples = ident::read_thrust_samples(id.input_path);
      } else if (id.kind == "thrust-hover") {
        samples = ident::gen_hover_experiment(id.payloads, params, gains);
      } else {
        samples = ident::gen_scale_experiment(id.pwm_levels, params).samples;
      }
      ident::write_thrust_samples(samples,
                                  fs::path(opts.out_dir) / "samples.csv");
      const ident::ThrustFit fit = ident::fit_thrust_coeff(samples);
      fitted.thrust_coeff = fit.thrust_coeff;
      std::cout << "thrust_coeff = " << fmt(fit.thrust_coeff) << " ("
                << fit.n << " samples, residual rms = "
                << fmt(fit.residual_rms) << " N)\n";
      summary << "kind = " << id.kind << "\nsamples = " << fit.n
              << "\nthrust_coeff = " << fmt(fit.thrust_coeff)
              << "\nresidual_rms = " << fmt(fit.residual_rms) << "\n";
    } else if (id.kind == "drag-yaw") {
      std::vector<ident::TorqueSample> samples;
      if (!id.input_path.empty()) {
        samples = ident::read_torque_samples(id.input_path);
      } else {
        ident::YawExperimentConfig cfg;
        cfg.maneuver = {id.alpha, id.maneuver_T};
        cfg.gyro_noise_std = id.noise;
        cfg.seed = opts.seed;
        cfg.plant_bias = id.bias;
        samples = ident::gen_yaw_experiment(cfg, params, gains);
      }
      ident::write_torque_samples(samples,
                                  fs::path(opts.out_dir) / "samples.csv");
      const ident::LineFit fit = ident::fit_drag_coeff(samples);
      fitted.drag_coeff = fit.slope;
      fitted.drag_offset = fit.intercept;
      std::cout << "drag_coeff = " << fmt(fit.slope)
                << ", drag_offset = " << fmt(fit.intercept) << " (" << fit.n
                << " samples, residual rms = " << fmt(fit.residual_rms)
                << " N m)\n";
      summary << "kind = drag-yaw\nsamples = " << fit.n
              << "\ndrag_coeff = " << fmt(fit.slope)
              << "\ndrag_offset = " << fmt(fit.intercept)
              << "\nresidual_rms = " << fmt(fit.residual_rms) << "\n";
    } else {
      std::cerr << "error: unknown identify kind '" << id.kind << "'\n";
      return kExitConfig;
    }

    fitted.validate();
    model::save_params(fitted, fs::path(opts.out_dir) / "fitted.params");
    std::cout << "wrote "
              << (fs::path(opts.out_dir) / "fitted.params").string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_export_plots(const std::string& log_path,
                     const std::string& thrust_path,
                     const std::string& torque_path,
                     const std::string& out_dir) {
  try {
    fs::create_directories(out_dir);
    bool wrote = false;
    if (!log_path.empty()) {
      const sim::SimLog log = sim::SimLog::read_csv(log_path);
      std::ofstream out(fs::path(out_dir) / "trajectory.csv");
      if (!out) throw ConfigError("cannot write trajectory.csv");
      out << "t,x,y,z,x_d,y_d,z_d,e_x,e_y,e_z\n";
      char buf[256];
      for (const sim::LogRow& row : log.rows) {
        std::snprintf(buf, sizeof(buf),
                      "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      row.t, row.state.r.x(), row.state.r.y(),
                      row.state.r.z(), row.ref_r.x(), row.ref_r.y(),
                      row.ref_r.z(), row.errors.e_r.x(), row.errors.e_r.y(),
                      row.errors.e_r.z());
        out << buf;
      }
      std::cout << "wrote " << (fs::path(out_dir) / "trajectory.csv").string()
                << " (" << log.rows.size() << " rows)\n";
      wrote = true;
    }
    if (!thrust_path.empty()) {
      const auto samples = ident::read_thrust_samples(thrust_path);
      ident::write_thrust_samples(samples,
                                  fs::path(out_dir) / "thrust_curve.csv");
      std::cout << "wrote "
                << (fs::path(out_dir) / "thrust_curve.csv").string() << "\n";
      wrote = true;
    }
    if (!torque_path.empty()) {
      const auto samples = ident::read_torque_samples(torque_path);
      ident::write_torque_samples(samples,
                                  fs::path(out_dir) / "torque_line.csv");
      std::cout << "wrote "
                << (fs::path(out_dir) / "torque_line.csv").string() << "\n";
      wrote = true;
    }
    if (!wrote) {
      throw ConfigError(
          "export-plots: provide --log, --thrust-samples or "
          "--torque-samples");
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "quadsim: quadrotor flight dynamics, geometric tracking control and "
      "parameter identification at desk scale"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  std::string sim_config_path;
  CLI::App* simulate =
      app.add_subcommand("simulate", "closed-loop tracking run");
  add_common(simulate, &sim_opts);
  simulate->add_option("--config", sim_config_path, "run configuration file");

  CommonOptions sweep_opts;
  std::string sweep_path;
  int jobs = 1;
  CLI::App* sweep =
      app.add_subcommand("sweep", "gain sweep with per-axis RMS report");
  add_common(sweep, &sweep_opts, /*with_gains=*/false);
  sweep->add_option("--sweep", sweep_path, "sweep specification file")
      ->required();
  sweep->add_option("--jobs", jobs, "parallel runs");

  CommonOptions id_opts;
  IdentifyOptions id;
  CLI::App* identify =
      app.add_subcommand("identify", "parameter identification");
  add_common(identify, &id_opts);
  identify
      ->add_option("--kind", id.kind,
                   "thrust-hover | thrust-scale | drag-yaw | actuator-line")
      ->required();
  identify->add_option("--input", id.input_path,
                       "sample CSV (data mode; default: synthetic run)");
  identify->add_option("--payloads", id.payloads,
                       "payload masses for thrust-hover, kg");
  identify->add_option("--pwm-levels", id.pwm_levels,
                       "pwm levels for thrust-scale");
  identify->add_option("--alpha", id.alpha,
                       "yaw acceleration magnitude, rad/s^2");
  identify->add_option("--maneuver-T", id.maneuver_T,
                       "yaw maneuver duration, s");
  identify->add_option("--noise", id.noise, "gyro noise std, rad/s (drag-yaw)");
  identify->add_flag("--bias", id.bias,
                     "enable the plant yaw-torque offset");
  identify->add_option("--kv", id.kv_rating, "motor speed rating, rpm/V");
  identify->add_option("--u-max", id.u_max, "supply voltage, V");
  identify->add_option("--pwm0", id.pwm0, "spin-up threshold");

  std::string export_log, export_thrust, export_torque;
  std::string export_out = "out/plots";
  CLI::App* export_plots =
      app.add_subcommand("export-plots", "tidy per-figure CSV export");
  export_plots->add_option("--log", export_log, "simulation log CSV");
  export_plots->add_option("--thrust-samples", export_thrust,
                           "thrust sample CSV");
  export_plots->add_option("--torque-samples", export_torque,
                           "torque sample CSV");
  export_plots->add_option("--out", export_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (simulate->parsed()) return cmd_simulate(sim_opts, sim_config_path);
  if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_path, jobs);
  if (identify->parsed()) return cmd_identify(id_opts, id);
  if (export_plots->parsed()) {
    return cmd_export_plots(export_log, export_thrust, export_torque,
                            export_out);
  }
  return kExitConfig;
}

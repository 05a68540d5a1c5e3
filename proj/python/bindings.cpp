// Python bindings for the core operations: rotation algebra, actuator model,
// geometric control, trajectories, closed-loop simulation and identification.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "quadsim/errors.hpp"
#include "quadsim/harness.hpp"
#include "quadsim/ident.hpp"
#include "quadsim/so3.hpp"

namespace py = pybind11;
using namespace quadsim;

namespace {

// Column block of the log as an (n, k) array.
template <typename Getter>
py::array_t<double> log_block(const sim::SimLog& log, int cols, Getter get) {
  const auto n = static_cast<py::ssize_t>(log.rows.size());
  py::array_t<double> out({n, static_cast<py::ssize_t>(cols)});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    for (int j = 0; j < cols; ++j) view(i, j) = get(log.rows[i], j);
  }
  return out;
}

py::array_t<double> log_scalar(const sim::SimLog& log,
                               double (*get)(const sim::LogRow&)) {
  const auto n = static_cast<py::ssize_t>(log.rows.size());
  py::array_t<double> out(n);
  auto view = out.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) view(i) = get(log.rows[i]);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Quadrotor flight dynamics, geometric tracking control and parameter "
      "identification";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DegeneracyError>(m, "DegeneracyError",
                                          PyExc_RuntimeError);
  py::register_exception<DivergenceError>(m, "DivergenceError",
                                          PyExc_RuntimeError);

  m.attr("GRAVITY") = kGravity;

  py::class_<RigidBodyState>(m, "RigidBodyState")
      .def(py::init<>())
      .def_readwrite("r", &RigidBodyState::r)
      .def_readwrite("v", &RigidBodyState::v)
      .def_readwrite("R", &RigidBodyState::R)
      .def_readwrite("omega", &RigidBodyState::omega);

  // ---- rotation algebra -------------------------------------------------
  auto so3_mod = m.def_submodule("so3", "rotation algebra on SO(3)");
  so3_mod.def("hat", &so3::hat, py::arg("v"));
  so3_mod.def("vee", &so3::vee, py::arg("m"), py::arg("tol") = 1e-9);
  so3_mod.def("exp", &so3::exp, py::arg("axis_angle"));
  so3_mod.def(
      "euler_to_rotation",
      [](double roll, double pitch, double yaw) {
        return so3::euler_to_rotation({roll, pitch, yaw});
      },
      py::arg("roll"), py::arg("pitch"), py::arg("yaw"));
  so3_mod.def("is_rotation", &so3::is_rotation, py::arg("m"),
              py::arg("tol") = 1e-9);
  so3_mod.def("attitude_error_value", &so3::attitude_error_value,
              py::arg("R"), py::arg("R_d"));
  so3_mod.def("attitude_error", &so3::attitude_error, py::arg("R"),
              py::arg("R_d"));
  so3_mod.def("angvel_error", &so3::angvel_error, py::arg("omega"),
              py::arg("R"), py::arg("R_d"), py::arg("omega_d"));
  so3_mod.def("reorthonormalize", &so3::reorthonormalize, py::arg("m"));

  // ---- vehicle and actuators --------------------------------------------
  auto model_mod = m.def_submodule("model", "vehicle parameters and actuators");
  py::class_<model::VehicleParams>(model_mod, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("mass", &model::VehicleParams::mass)
      .def_readwrite("inertia", &model::VehicleParams::inertia)
      .def_readwrite("arm_x", &model::VehicleParams::arm_x)
      .def_readwrite("arm_y", &model::VehicleParams::arm_y)
      .def_readwrite("thrust_coeff", &model::VehicleParams::thrust_coeff)
      .def_readwrite("drag_coeff", &model::VehicleParams::drag_coeff)
      .def_readwrite("drag_offset", &model::VehicleParams::drag_offset)
      .def_readwrite("theta1", &model::VehicleParams::theta1)
      .def_readwrite("theta2", &model::VehicleParams::theta2)
      .def_readwrite("pwm0", &model::VehicleParams::pwm0)
      .def_readwrite("u_max", &model::VehicleParams::u_max)
      .def("validate", &model::VehicleParams::validate);
  py::class_<model::MotorCommand>(model_mod, "MotorCommand")
      .def(py::init<>())
      .def_readwrite("pwm", &model::MotorCommand::pwm);
  py::class_<model::BodyWrench>(model_mod, "BodyWrench")
      .def(py::init<>())
      .def(py::init([](double thrust, const Vec3& torque) {
             return model::BodyWrench{thrust, torque};
           }),
           py::arg("thrust"), py::arg("torque"))
      .def_readwrite("thrust", &model::BodyWrench::thrust)
      .def_readwrite("torque", &model::BodyWrench::torque);
  py::class_<model::AllocationResult>(model_mod, "AllocationResult")
      .def_readonly("command", &model::AllocationResult::command)
      .def_readonly("saturated", &model::AllocationResult::saturated);
  model_mod.def("pwm_to_angvel", &model::pwm_to_angvel, py::arg("pwm"),
                py::arg("params"));
  model_mod.def("angvel_to_thrust", &model::angvel_to_thrust,
                py::arg("omega"), py::arg("params"));
  model_mod.def("pwm_to_thrust", &model::pwm_to_thrust, py::arg("pwm"),
                py::arg("params"));
  model_mod.def("thrust_to_pwm", &model::thrust_to_pwm, py::arg("thrust"),
                py::arg("params"));
  model_mod.def("wrench_from_angvels", &model::wrench_from_angvels,
                py::arg("omega"), py::arg("params"),
                py::arg("apply_drag_offset") = false);
  model_mod.def("motors_to_wrench", &model::motors_to_wrench, py::arg("cmd"),
                py::arg("params"), py::arg("apply_drag_offset") = false);
  model_mod.def("allocate", &model::allocate, py::arg("wrench"),
                py::arg("params"));
  model_mod.def("load_params", &model::load_params, py::arg("path"));
  model_mod.def("save_params", &model::save_params, py::arg("params"),
                py::arg("path"));

  // ---- geometric control -------------------------------------------------
  auto control_mod = m.def_submodule("control", "geometric tracking control");
  py::class_<control::ControlGains>(control_mod, "ControlGains")
      .def(py::init<>())
      .def(py::init([](double k_r, double k_v, double k_R, double k_omega) {
             return control::ControlGains{k_r, k_v, k_R, k_omega};
           }),
           py::arg("k_r"), py::arg("k_v"), py::arg("k_R"), py::arg("k_omega"))
      .def_readwrite("k_r", &control::ControlGains::k_r)
      .def_readwrite("k_v", &control::ControlGains::k_v)
      .def_readwrite("k_R", &control::ControlGains::k_R)
      .def_readwrite("k_omega", &control::ControlGains::k_omega);
  py::class_<control::StateReference>(control_mod, "StateReference")
      .def(py::init<>())
      .def_readwrite("r_d", &control::StateReference::r_d)
      .def_readwrite("v_d", &control::StateReference::v_d)
      .def_readwrite("a_d", &control::StateReference::a_d)
      .def_readwrite("yaw_d", &control::StateReference::yaw_d)
      .def_readwrite("yaw_rate_d", &control::StateReference::yaw_rate_d)
      .def_readwrite("R_d", &control::StateReference::R_d)
      .def_readwrite("omega_d", &control::StateReference::omega_d)
      .def_readwrite("omega_d_dot", &control::StateReference::omega_d_dot);
  py::class_<control::TrackingErrors>(control_mod, "TrackingErrors")
      .def_readonly("e_r", &control::TrackingErrors::e_r)
      .def_readonly("e_v", &control::TrackingErrors::e_v)
      .def_readonly("e_R", &control::TrackingErrors::e_R)
      .def_readonly("e_omega", &control::TrackingErrors::e_omega);
  py::class_<control::ControlOutput>(control_mod, "ControlOutput")
      .def_readonly("wrench", &control::ControlOutput::wrench)
      .def_readonly("R_d_used", &control::ControlOutput::R_d_used)
      .def_readonly("errors", &control::ControlOutput::errors)
      .def_readonly("degenerate_force",
                    &control::ControlOutput::degenerate_force)
      .def_readonly("degenerate_heading",
                    &control::ControlOutput::degenerate_heading);
  control_mod.def("position_errors", &control::position_errors,
                  py::arg("state"), py::arg("ref"));
  control_mod.def("desired_force_vector", &control::desired_force_vector,
                  py::arg("e_r"), py::arg("e_v"), py::arg("a_d"),
                  py::arg("params"), py::arg("gains"));
  control_mod.def("thrust_command", &control::thrust_command, py::arg("A"),
                  py::arg("R"));
  control_mod.def("desired_rotation", &control::desired_rotation,
                  py::arg("A"), py::arg("yaw_d"));
  control_mod.def("torque_command", &control::torque_command,
                  py::arg("state"), py::arg("ref"), py::arg("params"),
                  py::arg("gains"));
  control_mod.def(
      "control_step",
      [](const RigidBodyState& state, const control::StateReference& ref,
         const model::VehicleParams& params, const control::ControlGains& g) {
        return control::control_step(state, ref, params, g);
      },
      py::arg("state"), py::arg("ref"), py::arg("params"), py::arg("gains"));
  py::class_<control::BoundCheck>(control_mod, "BoundCheck")
      .def_readonly("max_value", &control::BoundCheck::max_value)
      .def_readonly("within", &control::BoundCheck::within);
  control_mod.def(
      "check_trajectory_bound",
      [](const std::vector<control::StateReference>& refs,
         const model::VehicleParams& params, double B) {
        return control::check_trajectory_bound(refs, params, B);
      },
      py::arg("refs"), py::arg("params"), py::arg("B"));
  py::class_<control::InitialCheck>(control_mod, "InitialCheck")
      .def_readonly("ok", &control::InitialCheck::ok)
      .def_readonly("psi", &control::InitialCheck::psi)
      .def_readonly("e_omega_sq", &control::InitialCheck::e_omega_sq)
      .def_readonly("omega_bound", &control::InitialCheck::omega_bound);
  control_mod.def("check_initial_conditions",
                  &control::check_initial_conditions, py::arg("state0"),
                  py::arg("ref0"), py::arg("params"), py::arg("gains"),
                  py::arg("psi1"));
  control_mod.def("load_gains", &control::load_gains, py::arg("path"));
  control_mod.def("save_gains", &control::save_gains, py::arg("gains"),
                  py::arg("path"));

  // ---- trajectories -------------------------------------------------------
  auto traj_mod = m.def_submodule("trajectory", "flat reference trajectories");
  py::class_<traj::FlatOutputs>(traj_mod, "FlatOutputs")
      .def_readonly("r", &traj::FlatOutputs::r)
      .def_readonly("v", &traj::FlatOutputs::v)
      .def_readonly("a", &traj::FlatOutputs::a)
      .def_readonly("yaw", &traj::FlatOutputs::yaw)
      .def_readonly("yaw_rate", &traj::FlatOutputs::yaw_rate);
  py::class_<traj::FlatTrajectory>(traj_mod, "FlatTrajectory")
      .def("eval", [](const traj::FlatTrajectory& f,
                      double t) { return f.eval(t); })
      .def_readonly("horizon", &traj::FlatTrajectory::horizon)
      .def_readonly("breakpoints", &traj::FlatTrajectory::breakpoints);
  traj_mod.def("hover", &traj::hover, py::arg("r0"), py::arg("yaw0"));
  traj_mod.def("helix", &traj::helix, py::arg("radius"), py::arg("period"),
               py::arg("climb_rate"), py::arg("z0"), py::arg("ramp"),
               py::arg("horizon") = 0.0);
  traj_mod.def(
      "yaw_bangbang",
      [](double alpha, double duration, const Vec3& r0) {
        return traj::yaw_bangbang({alpha, duration}, r0);
      },
      py::arg("alpha"), py::arg("duration"),
      py::arg("r0") = Vec3(0.0, 0.0, 1.0));
  traj_mod.def("expand", &traj::expand, py::arg("flat"), py::arg("t"),
               py::arg("params"), py::arg("gains"), py::arg("state"),
               py::arg("feedback") = true);
  traj_mod.def("expand_feedforward", &traj::expand_feedforward,
               py::arg("flat"), py::arg("t"), py::arg("params"),
               py::arg("gains"));
  traj_mod.def("load_trajectory", &traj::load_trajectory, py::arg("path"));

  // ---- simulation ----------------------------------------------------------
  auto sim_mod = m.def_submodule("sim", "closed-loop plant simulation");
  py::enum_<sim::Mode>(sim_mod, "Mode")
      .value("FULL", sim::Mode::kFull)
      .value("ATTITUDE_ONLY", sim::Mode::kAttitudeOnly);
  py::class_<sim::SimConfig>(sim_mod, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &sim::SimConfig::dt)
      .def_readwrite("duration", &sim::SimConfig::duration)
      .def_readwrite("control_period", &sim::SimConfig::control_period)
      .def_readwrite("mode", &sim::SimConfig::mode)
      .def_readwrite("plant_bias_b2", &sim::SimConfig::plant_bias_b2)
      .def_readwrite("initial", &sim::SimConfig::initial)
      .def_readwrite("pos_noise_std", &sim::SimConfig::pos_noise_std)
      .def_readwrite("att_noise_std", &sim::SimConfig::att_noise_std)
      .def_readwrite("seed", &sim::SimConfig::seed)
      .def("validate", &sim::SimConfig::validate);
  py::class_<sim::StateDerivative>(sim_mod, "StateDerivative")
      .def_readonly("r_dot", &sim::StateDerivative::r_dot)
      .def_readonly("v_dot", &sim::StateDerivative::v_dot)
      .def_readonly("R_dot", &sim::StateDerivative::R_dot)
      .def_readonly("omega_dot", &sim::StateDerivative::omega_dot);
  sim_mod.def("derivatives", &sim::derivatives, py::arg("state"),
              py::arg("wrench"), py::arg("params"));
  sim_mod.def("step", &sim::step, py::arg("state"), py::arg("wrench"),
              py::arg("params"), py::arg("dt"),
              py::arg("mode") = sim::Mode::kFull);
  py::class_<sim::SimLog>(sim_mod, "SimLog")
      .def("__len__", [](const sim::SimLog& log) { return log.rows.size(); })
      .def("write_csv",
           [](const sim::SimLog& log, const std::filesystem::path& path) {
             log.write_csv(path);
           },
           py::arg("path"))
      .def_static("read_csv",
                  [](const std::filesystem::path& path) {
                    return sim::SimLog::read_csv(path);
                  },
                  py::arg("path"))
      .def_property_readonly("t",
                             [](const sim::SimLog& log) {
                               return log_scalar(log, [](const sim::LogRow& r) {
                                 return r.t;
                               });
                             })
      .def_property_readonly("position",
                             [](const sim::SimLog& log) {
                               return log_block(
                                   log, 3, [](const sim::LogRow& r, int j) {
                                     return r.state.r[j];
                                   });
                             })
      .def_property_readonly("velocity",
                             [](const sim::SimLog& log) {
                               return log_block(
                                   log, 3, [](const sim::LogRow& r, int j) {
                                     return r.state.v[j];
                                   });
                             })
      .def_property_readonly("omega",
                             [](const sim::SimLog& log) {
                               return log_block(
                                   log, 3, [](const sim::LogRow& r, int j) {
                                     return r.state.omega[j];
                                   });
                             })
      .def_property_readonly("pwm",
                             [](const sim::SimLog& log) {
                               return log_block(
                                   log, 4, [](const sim::LogRow& r, int j) {
                                     return r.pwm.pwm[static_cast<std::size_t>(
                                         j)];
                                   });
                             })
      .def_property_readonly("thrust",
                             [](const sim::SimLog& log) {
                               return log_scalar(log, [](const sim::LogRow& r) {
                                 return r.wrench.thrust;
                               });
                             })
      .def_property_readonly("torque",
                             [](const sim::SimLog& log) {
                               return log_block(
                                   log, 3, [](const sim::LogRow& r, int j) {
                                     return r.wrench.torque[j];
                                   });
                             })
      .def_property_readonly("ref_position",
                             [](const sim::SimLog& log) {
                               return log_block(
                                   log, 3, [](const sim::LogRow& r, int j) {
                                     return r.ref_r[j];
                                   });
                             })
      .def_property_readonly("pos_error",
                             [](const sim::SimLog& log) {
                               return log_block(
                                   log, 3, [](const sim::LogRow& r, int j) {
                                     return r.errors.e_r[j];
                                   });
                             })
      .def_property_readonly("att_error",
                             [](const sim::SimLog& log) {
                               return log_block(
                                   log, 3, [](const sim::LogRow& r, int j) {
                                     return r.errors.e_R[j];
                                   });
                             });

  // ---- closed-loop harness -------------------------------------------------
  auto harness_mod =
      m.def_submodule("harness", "tracking runs, RMS metrics, gain sweeps");
  harness_mod.def(
      "rms",
      [](const std::vector<double>& series) { return harness::rms(series); },
      py::arg("series"));
  harness_mod.def("run_tracking", &harness::run_tracking, py::arg("config"),
                  py::arg("params"), py::arg("gains"), py::arg("flat"));
  harness_mod.def(
      "position_rms",
      [](const sim::SimLog& log, double skip) {
        return harness::position_rms(log, skip);
      },
      py::arg("log"), py::arg("skip") = 0.0);
  py::class_<harness::RmsRow>(harness_mod, "RmsRow")
      .def_readonly("k_r", &harness::RmsRow::k_r)
      .def_readonly("k_v", &harness::RmsRow::k_v)
      .def_readonly("rms_x", &harness::RmsRow::rms_x)
      .def_readonly("rms_y", &harness::RmsRow::rms_y)
      .def_readonly("rms_z", &harness::RmsRow::rms_z)
      .def_readonly("best", &harness::RmsRow::best);
  harness_mod.def(
      "run_sweep",
      [](const std::vector<std::pair<double, double>>& pairs, double k_R,
         double k_omega, double rms_skip, const sim::SimConfig& config,
         const model::VehicleParams& params, const traj::FlatTrajectory& flat,
         int jobs) {
        harness::SweepSpec spec;
        spec.pairs = pairs;
        spec.k_R = k_R;
        spec.k_omega = k_omega;
        spec.rms_skip = rms_skip;
        spec.sim = config;
        return harness::run_sweep(spec, params, flat, jobs).rows;
      },
      py::arg("pairs"), py::arg("k_R"), py::arg("k_omega"),
      py::arg("rms_skip"), py::arg("config"), py::arg("params"),
      py::arg("flat"), py::arg("jobs") = 1);

  // ---- identification --------------------------------------------------------
  auto ident_mod =
      m.def_submodule("ident", "parameter identification procedures");
  py::class_<ident::ThrustSample>(ident_mod, "ThrustSample")
      .def(py::init([](double omega_mean, double thrust) {
             return ident::ThrustSample{omega_mean, thrust};
           }),
           py::arg("omega_mean"), py::arg("thrust"))
      .def_readwrite("omega_mean", &ident::ThrustSample::omega_mean)
      .def_readwrite("thrust", &ident::ThrustSample::thrust);
  py::class_<ident::TorqueSample>(ident_mod, "TorqueSample")
      .def(py::init([](double sq_diff, double tau_z) {
             return ident::TorqueSample{sq_diff, tau_z};
           }),
           py::arg("sq_diff"), py::arg("tau_z"))
      .def_readwrite("sq_diff", &ident::TorqueSample::sq_diff)
      .def_readwrite("tau_z", &ident::TorqueSample::tau_z);
  py::class_<ident::ActuatorLine>(ident_mod, "ActuatorLine")
      .def_readonly("theta1", &ident::ActuatorLine::theta1)
      .def_readonly("theta2", &ident::ActuatorLine::theta2);
  py::class_<ident::ThrustFit>(ident_mod, "ThrustFit")
      .def_readonly("thrust_coeff", &ident::ThrustFit::thrust_coeff)
      .def_readonly("residual_rms", &ident::ThrustFit::residual_rms)
      .def_readonly("n", &ident::ThrustFit::n);
  py::class_<ident::LineFit>(ident_mod, "LineFit")
      .def_readonly("slope", &ident::LineFit::slope)
      .def_readonly("intercept", &ident::LineFit::intercept)
      .def_readonly("residual_rms", &ident::LineFit::residual_rms)
      .def_readonly("n", &ident::LineFit::n);
  ident_mod.def("actuator_line_from_kv", &ident::actuator_line_from_kv,
                py::arg("kv"), py::arg("u_max"), py::arg("pwm0"));
  ident_mod.def(
      "fit_thrust_coeff",
      [](const std::vector<ident::ThrustSample>& samples) {
        return ident::fit_thrust_coeff(samples);
      },
      py::arg("samples"));
  ident_mod.def(
      "fit_drag_coeff",
      [](const std::vector<ident::TorqueSample>& samples) {
        return ident::fit_drag_coeff(samples);
      },
      py::arg("samples"));
  py::class_<ident::HoverExperimentConfig>(ident_mod, "HoverExperimentConfig")
      .def(py::init<>())
      .def_readwrite("duration", &ident::HoverExperimentConfig::duration)
      .def_readwrite("window", &ident::HoverExperimentConfig::window)
      .def_readwrite("dt", &ident::HoverExperimentConfig::dt)
      .def_readwrite("control_period",
                     &ident::HoverExperimentConfig::control_period)
      .def_readwrite("r0", &ident::HoverExperimentConfig::r0);
  ident_mod.def(
      "gen_hover_experiment",
      [](const std::vector<double>& payloads,
         const model::VehicleParams& params,
         const control::ControlGains& gains,
         const ident::HoverExperimentConfig& config) {
        return ident::gen_hover_experiment(payloads, params, gains, config);
      },
      py::arg("payloads"), py::arg("params"), py::arg("gains"),
      py::arg("config") = ident::HoverExperimentConfig{});
  py::class_<ident::ScaleExperiment>(ident_mod, "ScaleExperiment")
      .def_readonly("samples", &ident::ScaleExperiment::samples)
      .def_readonly("scale_mass", &ident::ScaleExperiment::scale_mass);
  ident_mod.def(
      "gen_scale_experiment",
      [](const std::vector<double>& pwm_levels,
         const model::VehicleParams& params) {
        return ident::gen_scale_experiment(pwm_levels, params);
      },
      py::arg("pwm_levels"), py::arg("params"));
  py::class_<ident::YawExperimentConfig>(ident_mod, "YawExperimentConfig")
      .def(py::init<>())
      .def_property(
          "alpha",
          [](const ident::YawExperimentConfig& c) { return c.maneuver.alpha; },
          [](ident::YawExperimentConfig& c, double v) { c.maneuver.alpha = v; })
      .def_property(
          "duration",
          [](const ident::YawExperimentConfig& c) {
            return c.maneuver.duration;
          },
          [](ident::YawExperimentConfig& c, double v) {
            c.maneuver.duration = v;
          })
      .def_readwrite("r0", &ident::YawExperimentConfig::r0)
      .def_readwrite("dt", &ident::YawExperimentConfig::dt)
      .def_readwrite("control_period",
                     &ident::YawExperimentConfig::control_period)
      .def_readwrite("gyro_noise_std",
                     &ident::YawExperimentConfig::gyro_noise_std)
      .def_readwrite("seed", &ident::YawExperimentConfig::seed)
      .def_readwrite("settle_skip", &ident::YawExperimentConfig::settle_skip)
      .def_readwrite("plant_bias", &ident::YawExperimentConfig::plant_bias);
  ident_mod.def("gen_yaw_experiment", &ident::gen_yaw_experiment,
                py::arg("config"), py::arg("params"), py::arg("gains"));
  ident_mod.def("full_attitude_residual", &ident::full_attitude_residual,
                py::arg("state"), py::arg("params"));
}

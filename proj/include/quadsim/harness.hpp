#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quadsim/sim.hpp"
#include "quadsim/trajectory.hpp"

namespace quadsim::harness {

// Root mean square of a series. Rejects an empty series.
double rms(std::span<const double> series);

// Geometric tracking controller wired to a flat trajectory: expand the
// reference at each tick, run the control law, allocate motor commands.
// Keeps the previous attitude reference as a one-tick degeneracy fallback.
sim::ControllerFn make_geometric_controller(
    const model::VehicleParams& params, const control::ControlGains& gains,
    const traj::FlatTrajectory& flat);

// Closed-loop tracking run of `flat` under the geometric controller.
sim::SimLog run_tracking(const sim::SimConfig& config,
                         const model::VehicleParams& params,
                         const control::ControlGains& gains,
                         const traj::FlatTrajectory& flat);

// Per-axis RMS of the position error over rows with t >= skip.
std::array<double, 3> position_rms(const sim::SimLog& log, double skip);

struct SweepSpec {
  std::vector<std::pair<double, double>> pairs;  // (k_r, k_v)
  double k_R = 0.6;
  double k_omega = 0.15;
  double rms_skip = 2.0;  // s excluded from the RMS window (ramp-in)
  sim::SimConfig sim;

  void validate() const;
};

struct RmsRow {
  double k_r = 0.0;
  double k_v = 0.0;
  double rms_x = 0.0;
  double rms_y = 0.0;
  double rms_z = 0.0;
  bool best = false;  // argmin of rms_x^2 + rms_y^2 + rms_z^2
};

struct SweepResult {
  std::vector<RmsRow> rows;  // input order
  int argmin_index = -1;
  std::vector<std::string> failures;  // per-run diagnostics, empty on success
};

// One tracking run per gain pair; failed runs are reported and skipped while
// the remaining runs continue. jobs > 1 runs them on worker threads. When
// log_sink is set it receives each run's log, in input order.
SweepResult run_sweep(
    const SweepSpec& spec, const model::VehicleParams& params,
    const traj::FlatTrajectory& flat, int jobs = 1,
    const std::function<void(int, const sim::SimLog&)>& log_sink = {});

void write_report_csv(const SweepResult& result,
                      const std::filesystem::path& path);

SweepSpec load_sweep(const std::filesystem::path& path);

}  // namespace quadsim::harness

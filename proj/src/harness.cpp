#include "quadsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "quadsim/errors.hpp"

namespace quadsim::harness {

double rms(std::span<const double> series) {
  if (series.empty()) {
    throw std::invalid_argument("rms: empty series");
  }
  double sum_sq = 0.0;
  for (double x : series) sum_sq += x * x;
  return std::sqrt(sum_sq / static_cast<double>(series.size()));
}

sim::ControllerFn make_geometric_controller(
    const model::VehicleParams& params, const control::ControlGains& gains,
    const traj::FlatTrajectory& flat) {
  params.validate();
  gains.validate();
  auto prev = std::make_shared<std::optional<control::StateReference>>();
  return [params, gains, flat, prev](
             double t, const RigidBodyState& measured) -> sim::ControlTick {
    control::StateReference ref;
    bool degenerate_ref = false;
    try {
      ref = traj::expand(flat, t, params, gains, measured, true);
    } catch (const DegeneracyError&) {
      if (!prev->has_value()) throw;
      ref = **prev;  // reuse the previous reference for one tick
      degenerate_ref = true;
    }
    const Mat3* fallback =
        prev->has_value() ? &(*prev)->R_d : nullptr;
    const control::ControlOutput out =
        control::control_step(measured, ref, params, gains, fallback);
    ref.R_d = out.R_d_used;
    *prev = ref;

    const model::AllocationResult alloc = model::allocate(out.wrench, params);
    sim::ControlTick tick;
    tick.pwm = alloc.command;
    tick.commanded = out.wrench;
    tick.ref = ref;
    tick.errors = out.errors;
    tick.saturated = alloc.saturated;
    tick.degenerate =
        degenerate_ref || out.degenerate_force || out.degenerate_heading;
    return tick;
  };
}

sim::SimLog run_tracking(const sim::SimConfig& config,
                         const model::VehicleParams& params,
                         const control::ControlGains& gains,
                         const traj::FlatTrajectory& flat) {
  return sim::run(config, make_geometric_controller(params, gains, flat),
                  params);
}

std::array<double, 3> position_rms(const sim::SimLog& log, double skip) {
  std::array<std::vector<double>, 3> series;
  for (const sim::LogRow& row : log.rows) {
    if (row.t < skip) continue;
    for (int i = 0; i < 3; ++i) series[i].push_back(row.errors.e_r[i]);
  }
  return {rms(series[0]), rms(series[1]), rms(series[2])};
}

void SweepSpec::validate() const {
  if (pairs.empty()) throw ConfigError("sweep: empty gain list");
  for (const auto& [k_r, k_v] : pairs) {
    if (!(k_r > 0.0 && k_v > 0.0)) {
      throw ConfigError("sweep: gains must be strictly positive");
    }
  }
  if (!(k_R > 0.0 && k_omega > 0.0)) {
    throw ConfigError("sweep: attitude gains must be strictly positive");
  }
  if (!(rms_skip >= 0.0)) throw ConfigError("sweep: rms_skip must be >= 0");
  sim.validate();
}

SweepResult run_sweep(
    const SweepSpec& spec, const model::VehicleParams& params,
    const traj::FlatTrajectory& flat, int jobs,
    const std::function<void(int, const sim::SimLog&)>& log_sink) {
  spec.validate();
  const int n = static_cast<int>(spec.pairs.size());
  std::vector<std::optional<sim::SimLog>> logs(n);
  std::vector<std::string> errors(n);

  const auto worker = [&](int index) {
    const auto [k_r, k_v] = spec.pairs[index];
    control::ControlGains gains;
    gains.k_r = k_r;
    gains.k_v = k_v;
    gains.k_R = spec.k_R;
    gains.k_omega = spec.k_omega;
    try {
      logs[index] = run_tracking(spec.sim, params, gains, flat);
    } catch (const std::exception& e) {
      errors[index] = e.what();
    }
  };

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) worker(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> cursor{0};
    for (int j = 0; j < std::min(jobs, n); ++j) {
      pool.emplace_back([&] {
        for (int i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
          worker(i);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  SweepResult result;
  double best_sq = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    RmsRow row;
    row.k_r = spec.pairs[i].first;
    row.k_v = spec.pairs[i].second;
    if (!logs[i].has_value()) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "run %d (k_r=%g, k_v=%g): ", i,
                    row.k_r, row.k_v);
      result.failures.push_back(buf + errors[i]);
      continue;
    }
    const auto axis = position_rms(*logs[i], spec.rms_skip);
    row.rms_x = axis[0];
    row.rms_y = axis[1];
    row.rms_z = axis[2];
    const double total_sq =
        axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2];
    result.rows.push_back(row);
    if (total_sq < best_sq) {
      best_sq = total_sq;
      result.argmin_index = static_cast<int>(result.rows.size()) - 1;
    }
  }
  if (result.argmin_index >= 0) {
    result.rows[result.argmin_index].best = true;
  }
  if (log_sink) {
    for (int i = 0; i < n; ++i) {
      if (logs[i].has_value()) log_sink(i, *logs[i]);
    }
  }
  return result;
}

void write_report_csv(const SweepResult& result,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << "k_r,k_v,rms_x,rms_y,rms_z,best\n";
  char buf[192];
  for (const RmsRow& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", row.k_r,
                  row.k_v, row.rms_x, row.rms_y, row.rms_z,
                  row.best ? 1 : 0);
    out << buf;
  }
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  SweepSpec spec;
  const std::vector<double> flat_pairs = kv.number_list("pairs");
  if (flat_pairs.size() % 2 != 0) {
    throw ConfigError(path.string() +
                      ": 'pairs' must list k_r k_v values in pairs");
  }
  for (std::size_t i = 0; i + 1 < flat_pairs.size(); i += 2) {
    spec.pairs.emplace_back(flat_pairs[i], flat_pairs[i + 1]);
  }
  spec.k_R = kv.number_or("k_R", spec.k_R);
  spec.k_omega = kv.number_or("k_omega", spec.k_omega);
  spec.rms_skip = kv.number_or("rms_skip", spec.rms_skip);
  spec.sim = sim::config_from_kv(kv);
  kv.reject_unknown_keys();
  spec.validate();
  return spec;
}

}  // namespace quadsim::harness

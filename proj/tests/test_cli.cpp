// Spawns the built CLI binary and checks exit codes, diagnostics and the
// documented output layout. The binary path arrives as argv[1].
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const fs::path out_file = g_work / "cli_output.txt";
  const std::string cmd =
      "cd '" + g_work.string() + "' && '" + g_cli + "' " + args + " > '" +
      out_file.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  res.output = ss.str();
  return res;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string hover_traj() {
  return "kind = hover\nx = 0\ny = 0\nz = 1\nyaw = 0\nduration = 2\n";
}

}  // namespace

TEST_CASE("no subcommand is a usage error") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("missing parameter file exits 2 and names the file") {
  const RunResult res =
      run_cli("simulate --params does_not_exist.params --out out/x");
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("does_not_exist.params") != std::string::npos);
}

TEST_CASE("hover simulate meets the regulation bound and writes outputs") {
  write_file(g_work / "hover.traj", hover_traj());
  const RunResult res =
      run_cli("simulate --traj hover.traj --out out/hover");
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(g_work / "out/hover/log.csv"));
  CHECK(fs::exists(g_work / "out/hover/summary.txt"));

  std::ifstream summary(g_work / "out/hover/summary.txt");
  std::string line;
  double max_err = -1.0;
  while (std::getline(summary, line)) {
    if (line.rfind("max_pos_error = ", 0) == 0) {
      max_err = std::stod(line.substr(16));
    }
  }
  CHECK(max_err >= 0.0);
  CHECK(max_err < 1e-3);
}

TEST_CASE("a run from a headstand warns about the initial check but runs") {
  write_file(g_work / "hover2.traj", hover_traj());
  write_file(g_work / "flip.cfg",
             "duration = 1\nroll0 = 3.0\nr0_z = 1\n");  // psi ~ 1.99
  const RunResult res = run_cli(
      "simulate --traj hover2.traj --config flip.cfg --out out/flip");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("warning") != std::string::npos);
  CHECK(res.output.find("initial-condition") != std::string::npos);

  std::ifstream summary(g_work / "out/flip/summary.txt");
  std::stringstream ss;
  ss << summary.rdbuf();
  CHECK(ss.str().find("initial_check = fail") != std::string::npos);
}

TEST_CASE("identify actuator-line reports the slope") {
  const RunResult res = run_cli(
      "identify --kind actuator-line --kv 2450 --u-max 16.8 --pwm0 0.0305 "
      "--out out/line");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("4310.26") != std::string::npos);
  CHECK(fs::exists(g_work / "out/line/fitted.params"));
}

TEST_CASE("identify rejects an unknown kind") {
  CHECK(run_cli("identify --kind magic --out out/bad").exit_code == 2);
}

TEST_CASE("identify data mode fits a provided csv") {
  write_file(g_work / "thrust.csv",
             "omega_mean,thrust\n1000,0.9\n1200,1.3\n1400,1.8\n");
  const RunResult res = run_cli(
      "identify --kind thrust-hover --input thrust.csv --out out/datafit");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("thrust_coeff") != std::string::npos);
}

TEST_CASE("identify fails with exit 1 on a degenerate fit") {
  write_file(g_work / "flat.csv", "sq_diff,tau_z\n5,1\n5,2\n");
  const RunResult res =
      run_cli("identify --kind drag-yaw --input flat.csv --out out/degfit");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("spread") != std::string::npos);
}

TEST_CASE("export-plots rejects an empty log with exit 2") {
  write_file(g_work / "empty.csv", "");
  const RunResult res =
      run_cli("export-plots --log empty.csv --out out/plots");
  CHECK(res.exit_code == 2);
}

TEST_CASE("export-plots names the malformed row") {
  // valid header, then a short row
  std::ifstream good(g_work / "out/hover/log.csv");
  std::string header;
  std::getline(good, header);
  write_file(g_work / "broken.csv", header + "\n1,2,3\n");
  const RunResult res =
      run_cli("export-plots --log broken.csv --out out/plots2");
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("row 2") != std::string::npos);
}

TEST_CASE("export-plots projects the tracking columns") {
  const RunResult res =
      run_cli("export-plots --log out/hover/log.csv --out out/plots3");
  CHECK(res.exit_code == 0);
  std::ifstream out(g_work / "out/plots3/trajectory.csv");
  std::string header;
  std::getline(out, header);
  CHECK(header == "t,x,y,z,x_d,y_d,z_d,e_x,e_y,e_z");
}

TEST_CASE("sweep runs and flags the best row") {
  write_file(g_work / "mini.sweep",
             "pairs = 4 2 10 5\nk_R = 0.6\nk_omega = 0.15\nrms_skip = 2\n"
             "dt = 0.001\ncontrol_period = 0.002\nduration = 6\nr0_z = 1\n");
  write_file(g_work / "mini.traj",
             "kind = helix\nradius = 0.5\nperiod = 4\nclimb_rate = 0.1\n"
             "z0 = 1\nramp = 2\nduration = 6\n");
  const RunResult res = run_cli(
      "sweep --sweep mini.sweep --traj mini.traj --out out/sweep");
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(g_work / "out/sweep/report.csv"));
  CHECK(fs::exists(g_work / "out/sweep/run_kr10_kv5/log.csv"));

  std::ifstream report(g_work / "out/sweep/report.csv");
  std::string header, row1, row2;
  std::getline(report, header);
  std::getline(report, row1);
  std::getline(report, row2);
  CHECK(header == "k_r,k_v,rms_x,rms_y,rms_z,best");
  CHECK(row1.substr(0, 4) == "4,2,");
  CHECK(row1.back() == '0');  // not the best row
  CHECK(row2.substr(0, 5) == "10,5,");
  CHECK(row2.back() == '1');
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-cli-binary>\n");
    return 1;
  }
  g_cli = fs::absolute(argv[1]).string();
  g_work = fs::temp_directory_path() / "quadsim_cli_tests";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  doctest::Context context;
  context.applyCommandLine(1, argv);
  const int rc = context.run();
  fs::remove_all(g_work);
  return rc;
}

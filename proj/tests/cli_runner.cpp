// Integration checks for the dsq command-line tool. Runs the built binary
// against temporary configs and verifies outputs, exit codes and the
// determinism / round-trip contracts. Usage: dsq_cli_tests <path-to-dsq>.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "[ok] " << what << "\n";
  } else {
    std::cout << "[FAILED] " << what << "\n";
    ++failures;
  }
}

std::string binary;
std::string workdir;

int run(const std::string& args, const std::string& log_name) {
  const std::string cmd =
      binary + " " + args + " > " + workdir + "/" + log_name + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

const char* kExample1 = R"({"lambda_c": 1.0, "mu": 2.0, "lambda_s": 3.0, "mu_s": 4.0})";
const char* kExample2 = R"({"lambda_c": 2.0, "mu": 1.0, "lambda_s": 1.0, "mu_s": 2.0})";

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: dsq_cli_tests <path-to-dsq> [workdir]\n";
    return 2;
  }
  binary = argv[1];
  workdir = argc > 2 ? argv[2] : ".";

  const std::string ex1 = workdir + "/cli_ex1.json";
  const std::string ex2 = workdir + "/cli_ex2.json";
  write_file(ex1, kExample1);
  write_file(ex2, kExample2);

  // --- stability exit codes -------------------------------------------------
  check(run("stability --config " + ex1, "stab1.log") == 0,
        "stability on Example 1 exits 0");
  {
    const std::string log = slurp(workdir + "/stab1.log");
    check(log.find("stable = true") != std::string::npos,
          "stability output reports stable");
    check(log.find("threshold = 1.1485714") != std::string::npos,
          "stability output carries the threshold");
  }
  check(run("stability --config " + ex2, "stab2.log") == 3,
        "stability on Example 2 exits 3");

  // --- config errors ----------------------------------------------------
  write_file(workdir + "/bad.json", R"({"lambda_c": 1.0, "lambda_s": 1.0, "mu_s": 1.0})");
  check(run("stability --config " + workdir + "/bad.json", "bad.log") == 1,
        "missing mu exits 1");
  check(slurp(workdir + "/bad.log").find("mu") != std::string::npos,
        "error message names the missing field");
  write_file(workdir + "/bad2.json", R"({"lambda_c": 1.0, "mu": 1.0, "lambda_s": 1.0, "mu_s": 1.0, "sweep": [{"parameter": "bogus", "values": [1]}]})");
  check(run("sweep --config " + workdir + "/bad2.json", "bad2.log") == 1,
        "unknown sweep parameter exits 1");
  check(run("stability --config " + workdir + "/nonexistent.json", "bad3.log") == 1,
        "missing config file exits 1");

  // --- solve ------------------------------------------------------------
  check(run("solve --config " + ex1 + " --out " + workdir + "/solve.csv",
            "solve1.log") == 0,
        "solve on Example 1 exits 0");
  {
    const std::string csv = slurp(workdir + "/solve.csv");
    check(csv.find("EL,2.78680136") != std::string::npos,
          "solve csv carries E(L)");
    check(csv.find("max_abs_diff_vs_oracle") != std::string::npos,
          "solve csv carries the oracle gap");
  }
  check(run("solve --config " + ex2, "solve2.log") == 2,
        "solve on Example 2 exits 2");
  check(run("solve --config " + ex1 + " --format json --out " + workdir +
                "/solve.json",
            "solve3.log") == 0,
        "solve writes json when asked");
  check(slurp(workdir + "/solve.json").find("\"r_residual\"") != std::string::npos,
        "solve json carries r_residual");
  check(run("solve --config " + ex1 + " --max-level 40 --out " + workdir +
                "/solve40.csv",
            "solve4.log") == 0,
        "solve accepts a pinned oracle truncation level");
  check(slurp(workdir + "/solve40.csv").find("oracle_max_level,40") !=
            std::string::npos,
        "pinned truncation level is honored");

  // --- simulate: determinism and round-trip ------------------------------
  const std::string sim_args = "simulate --config " + ex1 +
                               " --horizon 2000 --seed 99 --out " + workdir;
  check(run(sim_args + "/traj_a.csv", "sim1.log") == 0, "simulate run A exits 0");
  check(run(sim_args + "/traj_b.csv", "sim2.log") == 0, "simulate run B exits 0");
  const std::string a = slurp(workdir + "/traj_a.csv");
  const std::string b = slurp(workdir + "/traj_b.csv");
  check(!a.empty() && a == b, "identical seeds give byte-identical trajectories");
  check(a.find("time,n_customers,k_servers,total,event_kind") == 0,
        "trajectory csv has the expected header");
  check(a.find("customer-arrival") != std::string::npos,
        "trajectory csv contains events");
  check(!slurp(workdir + "/traj_a.estimates.json").empty(),
        "estimates json written next to the trajectory");

  // Round-trip: every numeric field reprints identically at 17 significant
  // digits.
  {
    std::istringstream lines(a);
    std::string line;
    std::getline(lines, line);  // header
    bool roundtrip = true;
    int checked = 0;
    while (std::getline(lines, line) && checked < 5000) {
      const auto comma = line.find(',');
      const std::string field = line.substr(0, comma);
      const double value = std::strtod(field.c_str(), nullptr);
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", value);
      if (field != buf) roundtrip = false;
      ++checked;
    }
    check(roundtrip && checked > 100, "trajectory times round-trip at %.17g");
  }

  // Different seed must change the trajectory.
  check(run("simulate --config " + ex1 + " --horizon 2000 --seed 100 --out " +
                workdir + "/traj_c.csv",
            "sim3.log") == 0,
        "simulate with another seed exits 0");
  check(slurp(workdir + "/traj_c.csv") != a, "different seed changes the file");

  // simulate without an output path is a config error.
  check(run("simulate --config " + ex1 + " --horizon 100", "sim4.log") == 1,
        "simulate without out path exits 1");

  // --- sweep --------------------------------------------------------------
  write_file(workdir + "/sweep.json", R"({
    "lambda_c": 2.0, "mu": 1.0, "lambda_s": 1.0, "mu_s": 1.0,
    "horizon": 2000,
    "sweep": [{"parameter": "mu", "values": [1, 3]},
              {"parameter": "mu_s", "values": [1, 2]}]})");
  check(run("sweep --config " + workdir + "/sweep.json --out " + workdir +
                "/sweep.csv",
            "sweep.log") == 0,
        "sweep exits 0");
  {
    const std::string csv = slurp(workdir + "/sweep.csv");
    int rows = -1;  // header
    for (char c : csv) rows += c == '\n';
    check(rows == 4, "sweep emits one row per grid point");
    // lambda_c=2, mu=1, mu_s=1 is unstable: blank analytic columns.
    check(csv.find("2,1,1,1,3,false,1.5,,,,,,") != std::string::npos,
          "unstable row carries blank analytic columns");
    // mu=3, mu_s=1 is stable: analytic columns populated.
    check(csv.find("2,3,1,1,3,true,") != std::string::npos,
          "stable row is flagged true");
  }

  // --- validate -----------------------------------------------------------
  check(run("validate --config " + ex1 + " --horizon 50000", "val.log") == 0,
        "validate on Example 1 exits 0");
  check(slurp(workdir + "/val.log").find("all checks passed") != std::string::npos,
        "validate reports success");
  check(run("validate --config " + ex2, "val2.log") == 2,
        "validate on Example 2 exits 2");

  if (failures == 0) {
    std::cout << "cli: all checks passed\n";
    return 0;
  }
  std::cout << "cli: " << failures << " check(s) FAILED\n";
  return 1;
}

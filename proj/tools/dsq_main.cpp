// dsq: solver + simulator for the disguised-servers queueing model.
//
// Subcommands: stability | solve | simulate | sweep | validate.
// Exit codes: 0 success, 1 config error, 2 analytic solve refused (unstable),
// 3 stability subcommand reporting an unstable model.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dsq/errors.hpp"
#include "dsq/metrics.hpp"
#include "dsq/model.hpp"
#include "dsq/oracle.hpp"
#include "dsq/qbd.hpp"
#include "dsq/sim.hpp"
#include "dsq/stability.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitUnstableSolve = 2;
constexpr int kExitUnstableReport = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepAxis {
  std::string parameter;
  std::vector<double> values;
};

struct RunConfig {
  dsq::ModelParams params;
  double r_tol = 1e-12;
  long r_max_iter = 100000;
  double boundary_tol = 1e-9;
  double tail_tol = 1e-12;
  int max_level = 0;  // 0 = automatic truncation growth
  std::uint64_t seed = 1;
  double horizon = 1e6;
  double warmup = -1.0;  // negative = 10% of horizon
  std::optional<double> grid_step;
  std::vector<SweepAxis> sweep;
  std::string out;
  std::string format = "csv";
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json expect_number(const json& j, const std::string& field) {
  if (!j.contains(field)) throw ConfigError("missing required field: " + field);
  if (!j[field].is_number()) throw ConfigError("field must be a number: " + field);
  return j[field];
}

std::vector<double> number_array(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_array() || j[field].empty()) {
    throw ConfigError("field must be a non-empty array of numbers: " + field);
  }
  std::vector<double> out;
  for (const auto& v : j[field]) {
    if (!v.is_number()) throw ConfigError("non-numeric entry in: " + field);
    out.push_back(v.get<double>());
  }
  return out;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }

  RunConfig cfg;
  cfg.params.lambda_c = expect_number(j, "lambda_c").get<double>();
  cfg.params.mu = expect_number(j, "mu").get<double>();

  if (j.contains("lambda_s") && j.contains("server_arrival")) {
    throw ConfigError("give either lambda_s or server_arrival, not both");
  }
  if (j.contains("lambda_s")) {
    cfg.params.server_arrival = {expect_number(j, "lambda_s").get<double>()};
  } else if (j.contains("server_arrival")) {
    cfg.params.server_arrival = number_array(j, "server_arrival");
  } else {
    throw ConfigError("missing required field: lambda_s (or server_arrival)");
  }
  if (j.contains("mu_s") && j.contains("server_departure")) {
    throw ConfigError("give either mu_s or server_departure, not both");
  }
  if (j.contains("mu_s")) {
    cfg.params.server_departure = {expect_number(j, "mu_s").get<double>()};
  } else if (j.contains("server_departure")) {
    cfg.params.server_departure = number_array(j, "server_departure");
  } else {
    throw ConfigError("missing required field: mu_s (or server_departure)");
  }

  cfg.params.max_servers = j.value("K", 3);
  cfg.r_tol = j.value("r_tol", 1e-12);
  cfg.r_max_iter = j.value("r_max_iter", 100000L);
  cfg.boundary_tol = j.value("boundary_tol", 1e-9);
  cfg.tail_tol = j.value("tail_tol", 1e-12);
  cfg.max_level = j.value("max_level", 0);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.horizon = j.value("horizon", 1e6);
  cfg.warmup = j.value("warmup", -1.0);
  if (j.contains("grid_step")) {
    cfg.grid_step = expect_number(j, "grid_step").get<double>();
  }
  cfg.out = j.value("out", std::string{});
  cfg.format = j.value("format", std::string{"csv"});

  if (j.contains("sweep")) {
    if (!j["sweep"].is_array()) throw ConfigError("sweep must be an array");
    for (const auto& axis : j["sweep"]) {
      SweepAxis a;
      if (!axis.contains("parameter") || !axis["parameter"].is_string()) {
        throw ConfigError("sweep axis needs a string field: parameter");
      }
      a.parameter = axis["parameter"].get<std::string>();
      if (a.parameter != "lambda_c" && a.parameter != "mu" &&
          a.parameter != "lambda_s" && a.parameter != "mu_s") {
        throw ConfigError("unknown sweep parameter: " + a.parameter);
      }
      a.values = number_array(axis, "values");
      cfg.sweep.push_back(std::move(a));
    }
  }

  if (cfg.r_tol <= 0.0 || cfg.boundary_tol <= 0.0 || cfg.tail_tol <= 0.0) {
    throw ConfigError("all tolerances must be positive");
  }
  if (cfg.format != "csv" && cfg.format != "json") {
    throw ConfigError("format must be csv or json");
  }
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
  return cfg;
}

dsq::SimConfig sim_config(const RunConfig& cfg) {
  dsq::SimConfig sc;
  sc.seed = cfg.seed;
  sc.horizon = cfg.horizon;
  sc.warmup = cfg.warmup;
  sc.sample_step = cfg.grid_step;
  return sc;
}

dsq::OracleOptions oracle_options(const RunConfig& cfg) {
  dsq::OracleOptions opts;
  opts.tail_tol = cfg.tail_tol;
  opts.explicit_max_level = cfg.max_level;
  return opts;
}

json to_json(const dsq::StabilityReport& r) {
  return json{{"rho_c", r.rho_c},       {"rho_s", r.rho_s},
              {"pi_A", r.pi_a},         {"up_drift", r.up_drift},
              {"down_drift", r.down_drift}, {"threshold", r.threshold},
              {"stable", r.stable}};
}

json to_json(const dsq::Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const dsq::Metrics& m, double lambda_c, double total_length) {
  json out{{"expected_total_length", m.expected_total_length},
           {"expected_customers_waiting", m.expected_customers_waiting},
           {"expected_wait", m.expected_wait},
           {"delay_probability", m.delay_probability}};
  // Auxiliary column: some published tables report E(L)/lambda_c as the wait,
  // so both readings stay comparable.
  out["expected_total_over_lambda_c"] =
      lambda_c > 0.0 ? total_length / lambda_c : 0.0;
  return out;
}

json to_json(const dsq::SimEstimates& est) {
  return json{{"mean_total_length", est.mean_total_length},
              {"se_total_length", est.se_total_length},
              {"mean_customer_count", est.mean_customer_count},
              {"se_customer_count", est.se_customer_count},
              {"mean_server_count", est.mean_server_count},
              {"se_server_count", est.se_server_count},
              {"mean_waiting_customers", est.mean_waiting_customers},
              {"se_waiting_customers", est.se_waiting_customers},
              {"delay_fraction", est.delay_fraction},
              {"se_delay_fraction", est.se_delay_fraction},
              {"delay_fraction_physical", est.delay_fraction_physical},
              {"se_delay_fraction_physical", est.se_delay_fraction_physical},
              {"arrivals_count", est.arrivals_count},
              {"departures_count", est.departures_count},
              {"horizon", est.horizon},
              {"warmup", est.warmup},
              {"seed", est.seed},
              {"stream", est.stream}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << text;
}

std::string event_kind_name(dsq::TransitionKind kind) {
  switch (kind) {
    case dsq::TransitionKind::CustomerArrival: return "customer-arrival";
    case dsq::TransitionKind::ServiceCompletion: return "service-completion";
    case dsq::TransitionKind::ServerArrival: return "server-arrival";
    case dsq::TransitionKind::ServerDeparture: return "server-departure";
  }
  return "unknown";
}

std::string strip_extension(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path;
  }
  return path.substr(0, dot);
}

// ---------------------------------------------------------------------------

int cmd_stability(const RunConfig& cfg) {
  const dsq::StabilityReport report = dsq::ergodicity(cfg.params);
  std::ostringstream out;
  out << "rho_c = " << fmt(report.rho_c) << "\n"
      << "rho_s = " << fmt(report.rho_s) << "\n";
  out << "pi_A =";
  for (double v : report.pi_a) out << " " << fmt(v);
  out << "\n"
      << "threshold = " << fmt(report.threshold) << "\n"
      << "up_drift = " << fmt(report.up_drift) << "\n"
      << "down_drift = " << fmt(report.down_drift) << "\n"
      << "stable = " << (report.stable ? "true" : "false") << "\n";
  std::cout << out.str();
  if (!cfg.out.empty()) {
    write_text(cfg.out, to_json(report).dump(2) + "\n");
  }
  return report.stable ? kExitOk : kExitUnstableReport;
}

struct SolveArtifacts {
  dsq::StabilityReport stability;
  dsq::SteadyState steady;
  dsq::Metrics analytic;
  dsq::OracleSolution oracle;
  dsq::Metrics oracle_side;
  dsq::ComparisonReport comparison;
};

SolveArtifacts run_solve(const RunConfig& cfg) {
  dsq::SolveOptions opts;
  opts.r_tol = cfg.r_tol;
  opts.r_max_iter = cfg.r_max_iter;
  opts.boundary_tol = cfg.boundary_tol;
  SolveArtifacts art{
      .stability = dsq::ergodicity(cfg.params),
      .steady = dsq::solve_qbd(cfg.params, opts),
      .analytic = {},
      .oracle = dsq::solve_truncated(cfg.params, oracle_options(cfg)),
      .oracle_side = {},
      .comparison = {},
  };
  art.analytic = dsq::compute_metrics(art.steady, cfg.params);
  art.oracle_side = dsq::oracle_metrics(art.oracle);
  art.comparison = dsq::compare_with_oracle(art.steady, art.oracle, 1e-8);
  return art;
}

json solve_to_json(const RunConfig& cfg, const SolveArtifacts& art) {
  json doc;
  doc["params"] = {{"lambda_c", cfg.params.lambda_c},
                   {"mu", cfg.params.mu},
                   {"server_arrival", cfg.params.server_arrival},
                   {"server_departure", cfg.params.server_departure},
                   {"K", cfg.params.max_servers}};
  doc["stability"] = to_json(art.stability);
  json boundary = json::array();
  for (const auto& level : art.steady.boundary) boundary.push_back(level);
  doc["steady_state"] = {{"boundary", boundary},
                         {"R", to_json(art.steady.R)},
                         {"alpha", art.steady.alpha},
                         {"r_iterations", art.steady.r_iterations},
                         {"r_residual", art.steady.r_residual}};
  doc["metrics"] = to_json(art.analytic, cfg.params.lambda_c,
                           art.analytic.expected_total_length);
  doc["oracle"] = {{"max_level", art.oracle.max_level},
                   {"tail_mass", art.oracle.tail_mass},
                   {"residual", art.oracle.residual},
                   {"metrics", to_json(art.oracle_side, cfg.params.lambda_c,
                                       art.oracle_side.expected_total_length)}};
  doc["comparison"] = {{"max_abs_diff", art.comparison.max_abs_diff},
                       {"worst_level", art.comparison.worst_level},
                       {"pass", art.comparison.pass}};
  return doc;
}

std::string solve_to_csv(const RunConfig& cfg, const SolveArtifacts& art) {
  std::ostringstream out;
  out << "quantity,value\n";
  auto row = [&](const std::string& name, double v) {
    out << name << "," << fmt(v) << "\n";
  };
  for (std::size_t level = 0; level < art.steady.boundary.size(); ++level) {
    const auto& pi = art.steady.boundary[level];
    for (std::size_t k = 0; k < pi.size(); ++k) {
      row("pi" + std::to_string(level) + "_" + std::to_string(k), pi[k]);
    }
  }
  for (std::size_t i = 0; i < art.steady.R.rows(); ++i) {
    for (std::size_t j = 0; j < art.steady.R.cols(); ++j) {
      row("R_" + std::to_string(i) + "_" + std::to_string(j), art.steady.R(i, j));
    }
  }
  row("alpha", art.steady.alpha);
  row("r_iterations", static_cast<double>(art.steady.r_iterations));
  row("r_residual", art.steady.r_residual);
  row("EL", art.analytic.expected_total_length);
  row("ELn", art.analytic.expected_customers_waiting);
  row("EW", art.analytic.expected_wait);
  row("EL_over_lambda_c",
      art.analytic.expected_total_length / cfg.params.lambda_c);
  row("Pw", art.analytic.delay_probability);
  row("oracle_EL", art.oracle_side.expected_total_length);
  row("oracle_ELn", art.oracle_side.expected_customers_waiting);
  row("oracle_EW", art.oracle_side.expected_wait);
  row("oracle_Pw", art.oracle_side.delay_probability);
  row("oracle_max_level", static_cast<double>(art.oracle.max_level));
  row("oracle_tail_mass", art.oracle.tail_mass);
  row("max_abs_diff_vs_oracle", art.comparison.max_abs_diff);
  return out.str();
}

int cmd_solve_body(const RunConfig& cfg, const SolveArtifacts& art);

int cmd_solve(const RunConfig& cfg) {
  try {
    return cmd_solve_body(cfg, run_solve(cfg));
  } catch (const dsq::UnstableModelError& err) {
    std::cerr << "analytic solve refused: " << err.what() << "\n";
    const auto& r = err.report();
    std::cerr << "threshold = " << fmt(r.threshold)
              << ", rho_c = " << fmt(r.rho_c) << "\n";
    return kExitUnstableSolve;
  }
}

int cmd_solve_body(const RunConfig& cfg, const SolveArtifacts& art) {
  const std::string text = cfg.format == "json"
                               ? solve_to_json(cfg, art).dump(2) + "\n"
                               : solve_to_csv(cfg, art);
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
    std::cout << "wrote " << cfg.out << "\n";
  }
  std::cout << "solver-vs-oracle max |diff| = " << fmt(art.comparison.max_abs_diff)
            << " over levels 0.." << art.oracle.max_level << "\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
  if (cfg.out.empty()) {
    throw ConfigError("simulate needs an output path (config \"out\" or --out)");
  }
  const dsq::SimConfig sc = sim_config(cfg);
  const dsq::Trajectory traj = dsq::simulate(cfg.params, sc);

  std::ostringstream csv;
  csv << "time,n_customers,k_servers,total,event_kind\n";
  csv << fmt(0.0) << "," << traj.initial.customers << "," << traj.initial.servers
      << "," << traj.initial.customers + traj.initial.servers << ",init\n";
  for (const auto& ev : traj.events) {
    csv << fmt(ev.time) << "," << ev.state.customers << "," << ev.state.servers
        << "," << ev.state.customers + ev.state.servers << ","
        << event_kind_name(ev.kind) << "\n";
  }
  write_text(cfg.out, csv.str());

  const dsq::SimEstimates est = dsq::estimate(cfg.params, sc);
  const std::string est_path = strip_extension(cfg.out) + ".estimates.json";
  write_text(est_path, to_json(est).dump(2) + "\n");

  std::string grid_path;
  if (cfg.grid_step) {
    const auto samples = dsq::sample_on_grid(traj, *cfg.grid_step);
    std::ostringstream grid;
    grid << "time,n_customers,k_servers,total\n";
    for (const auto& s : samples) {
      grid << fmt(s.time) << "," << s.customers << "," << s.servers << ","
           << s.total << "\n";
    }
    grid_path = strip_extension(cfg.out) + ".grid.csv";
    write_text(grid_path, grid.str());
  }

  std::cout << "wrote " << cfg.out << " (" << traj.events.size() << " events)\n"
            << "wrote " << est_path << "\n";
  if (!grid_path.empty()) std::cout << "wrote " << grid_path << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.sweep.empty()) {
    throw ConfigError("sweep needs a non-empty sweep specification");
  }
  std::size_t total = 1;
  for (const auto& axis : cfg.sweep) total *= axis.values.size();

  std::vector<dsq::ModelParams> grid(total, cfg.params);
  for (std::size_t index = 0; index < total; ++index) {
    std::size_t rest = index;
    // Last listed axis varies fastest.
    for (auto axis = cfg.sweep.rbegin(); axis != cfg.sweep.rend(); ++axis) {
      const double value = axis->values[rest % axis->values.size()];
      rest /= axis->values.size();
      dsq::ModelParams& p = grid[index];
      if (axis->parameter == "lambda_c") p.lambda_c = value;
      if (axis->parameter == "mu") p.mu = value;
      if (axis->parameter == "lambda_s") p.server_arrival = {value};
      if (axis->parameter == "mu_s") p.server_departure = {value};
    }
  }

  struct Row {
    dsq::StabilityReport stability;
    bool solved = false;
    dsq::Metrics analytic;
    dsq::SimEstimates sim;
    std::string error;
  };
  std::vector<Row> rows(total);

  dsq::SolveOptions solve_opts;
  solve_opts.r_tol = cfg.r_tol;
  solve_opts.r_max_iter = cfg.r_max_iter;
  solve_opts.boundary_tol = cfg.boundary_tol;

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(total); ++i) {
    Row& row = rows[static_cast<std::size_t>(i)];
    const dsq::ModelParams& p = grid[static_cast<std::size_t>(i)];
    try {
      row.stability = dsq::ergodicity(p);
      if (row.stability.stable) {
        const dsq::SteadyState ss = dsq::solve_qbd(p, solve_opts);
        row.analytic = dsq::compute_metrics(ss, p);
        row.solved = true;
      }
      row.sim = dsq::estimate(p, sim_config(cfg), static_cast<std::uint64_t>(i));
    } catch (const std::exception& err) {
      row.error = err.what();
    }
  }

  for (const auto& row : rows) {
    if (!row.error.empty()) throw ConfigError("sweep point failed: " + row.error);
  }

  std::ostringstream out;
  out << "lambda_c,mu,lambda_s,mu_s,K,stable,threshold,"
         "EL,ELn,EW,EL_over_lambda_c,Pw,"
         "sim_mean_total,sim_se_total,sim_mean_waiting,sim_se_waiting,"
         "sim_mean_customers,sim_mean_servers,sim_delay,"
         "sim_delay_physical,sim_arrivals\n";
  for (std::size_t i = 0; i < total; ++i) {
    const dsq::ModelParams& p = grid[i];
    const Row& row = rows[i];
    out << fmt(p.lambda_c) << "," << fmt(p.mu) << ","
        << fmt(p.lambda_s_tail()) << "," << fmt(p.mu_s_tail()) << ","
        << p.max_servers << "," << (row.stability.stable ? "true" : "false")
        << "," << fmt(row.stability.threshold) << ",";
    if (row.solved) {
      out << fmt(row.analytic.expected_total_length) << ","
          << fmt(row.analytic.expected_customers_waiting) << ","
          << fmt(row.analytic.expected_wait) << ","
          << fmt(row.analytic.expected_total_length / p.lambda_c) << ","
          << fmt(row.analytic.delay_probability);
    } else {
      out << ",,,,";  // blank analytic columns for unstable rows
    }
    out << "," << fmt(row.sim.mean_total_length) << ","
        << fmt(row.sim.se_total_length) << ","
        << fmt(row.sim.mean_waiting_customers) << ","
        << fmt(row.sim.se_waiting_customers) << ","
        << fmt(row.sim.mean_customer_count) << ","
        << fmt(row.sim.mean_server_count) << ","
        << fmt(row.sim.delay_fraction) << ","
        << fmt(row.sim.delay_fraction_physical) << ","
        << row.sim.arrivals_count << "\n";
  }

  if (cfg.out.empty()) {
    std::cout << out.str();
  } else {
    write_text(cfg.out, out.str());
    std::cout << "wrote " << cfg.out << " (" << total << " rows)\n";
  }
  return kExitOk;
}

int cmd_validate_body(const RunConfig& cfg, const SolveArtifacts& art);

int cmd_validate(const RunConfig& cfg) {
  try {
    return cmd_validate_body(cfg, run_solve(cfg));
  } catch (const dsq::UnstableModelError& err) {
    std::cerr << "validate: analytic solve refused: " << err.what() << "\n";
    return kExitUnstableSolve;
  }
}

int cmd_validate_body(const RunConfig& cfg, const SolveArtifacts& art) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    if (!ok) ++failures;
  };

  check("r-equation residual", art.steady.r_residual <= 1e-10,
        fmt(art.steady.r_residual) + " (limit 1e-10)");
  const auto radius = dsq::spectral_radius_estimate(art.steady.R);
  check("spectral radius of R", radius.converged && radius.value < 1.0,
        fmt(radius.value));
  check("solver vs oracle", art.comparison.pass,
        "max |diff| " + fmt(art.comparison.max_abs_diff) + " over levels 0.." +
            std::to_string(art.oracle.max_level) + " (limit 1e-8)");
  const double el_gap = std::abs(art.analytic.expected_total_length -
                                 art.oracle_side.expected_total_length);
  const double pw_gap = std::abs(art.analytic.delay_probability -
                                 art.oracle_side.delay_probability);
  const double eln_gap = std::abs(art.analytic.expected_customers_waiting -
                                  art.oracle_side.expected_customers_waiting);
  check("metric closed forms vs direct sums",
        el_gap <= 1e-8 && pw_gap <= 1e-8 && eln_gap <= 1e-8,
        "gaps " + fmt(el_gap) + " / " + fmt(eln_gap) + " / " + fmt(pw_gap));

  const dsq::SimEstimates est = dsq::estimate(cfg.params, sim_config(cfg));
  const double el_tol = std::max(3.0 * est.se_total_length,
                                 0.01 * art.oracle_side.expected_total_length);
  const double pw_tol = std::max(3.0 * est.se_delay_fraction,
                                 0.01 * art.oracle_side.delay_probability);
  check("simulation mean total length",
        std::abs(est.mean_total_length - art.oracle_side.expected_total_length) <=
            el_tol,
        fmt(est.mean_total_length) + " vs oracle " +
            fmt(art.oracle_side.expected_total_length) + " (tol " + fmt(el_tol) +
            ")");
  check("simulation delay fraction",
        std::abs(est.delay_fraction - art.oracle_side.delay_probability) <=
            pw_tol,
        fmt(est.delay_fraction) + " vs oracle " +
            fmt(art.oracle_side.delay_probability) + " (tol " + fmt(pw_tol) + ")");

  if (failures == 0) {
    std::cout << "validate: all checks passed\n";
    return kExitOk;
  }
  std::cerr << "validate: " << failures << " check(s) failed\n";
  return kExitConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disguised-servers queue: QBD solver, truncated oracle, simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path;
  std::string out_override;
  std::string format_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  double horizon_override = 0.0;
  bool horizon_set = false;
  int max_level_override = 0;
  bool max_level_set = false;

  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_override, "output path");
  app.add_option("--format", format_override, "csv or json");
  app.add_option("--seed", seed_override, "simulation seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--horizon", horizon_override, "simulated time horizon")
      ->each([&](const std::string&) { horizon_set = true; });
  app.add_option("--max-level", max_level_override, "oracle truncation level")
      ->each([&](const std::string&) { max_level_set = true; });

  auto* stability = app.add_subcommand("stability", "ergodicity analysis");
  auto* solve = app.add_subcommand("solve", "matrix-geometric solve + oracle");
  auto* simulate = app.add_subcommand("simulate", "trajectory + estimates");
  auto* sweep = app.add_subcommand("sweep", "grid of solves and simulations");
  auto* validate = app.add_subcommand("validate", "solver/oracle/simulator agreement");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) return app.exit(err);  // --help
    std::cerr << err.what() << "\n";
    return kExitConfigError;
  }

  try {
    RunConfig cfg = parse_config(config_path);
    if (!out_override.empty()) cfg.out = out_override;
    if (!format_override.empty()) {
      if (format_override != "csv" && format_override != "json") {
        throw ConfigError("format must be csv or json");
      }
      cfg.format = format_override;
    }
    if (seed_set) cfg.seed = seed_override;
    if (horizon_set) cfg.horizon = horizon_override;
    if (max_level_set) cfg.max_level = max_level_override;

    if (stability->parsed()) return cmd_stability(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (validate->parsed()) return cmd_validate(cfg);
    return kExitConfigError;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfigError;
  }
}

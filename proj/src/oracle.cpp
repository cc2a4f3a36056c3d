#include "dsq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsq/errors.hpp"

namespace dsq {

namespace {

struct SparseGenerator {
  // CSR over incoming transitions (column-major view of Q): entry lists are
  // what feeds balance equation j, so residuals and left products are gathers.
  kernels::CsrTransposed qt;
  Vector diag;          // q_ii, also the exit rates with sign flipped
  double max_exit = 0;  // max |q_ii|
};

SparseGenerator sparse_generator(const ModelParams& params, int max_level) {
  const StateSpace space(params.max_servers, max_level);
  const std::size_t n = space.total_states();
  std::vector<std::vector<std::pair<std::size_t, double>>> incoming(n);
  SparseGenerator g;
  g.diag.assign(n, 0.0);
  Transition buf[4];
  for (std::size_t i = 0; i < n; ++i) {
    const State s = space.state_of(i);
    const int count = enumerate_transitions(params, s, buf);
    for (int t = 0; t < count; ++t) {
      if (buf[t].to.customers > max_level) continue;
      const std::size_t j = space.index_of(buf[t].to);
      incoming[j].emplace_back(i, buf[t].rate);
      g.diag[i] -= buf[t].rate;
    }
  }
  g.qt.size = n;
  g.qt.row_start.assign(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    g.qt.row_start[j + 1] = g.qt.row_start[j] + incoming[j].size();
  }
  g.qt.col.resize(g.qt.row_start[n]);
  g.qt.val.resize(g.qt.row_start[n]);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t pos = g.qt.row_start[j];
    for (const auto& [src, rate] : incoming[j]) {
      g.qt.col[pos] = src;
      g.qt.val[pos] = rate;
      ++pos;
    }
  }
  for (double d : g.diag) g.max_exit = std::max(g.max_exit, -d);
  return g;
}

// max_j |sum_i pi_i q_ij| via the incoming lists plus the diagonal.
double balance_residual(const SparseGenerator& g, const Vector& pi) {
  double worst = 0.0;
  for (std::size_t j = 0; j < g.qt.size; ++j) {
    double acc = pi[j] * g.diag[j];
    for (std::size_t e = g.qt.row_start[j]; e < g.qt.row_start[j + 1]; ++e) {
      acc += g.qt.val[e] * pi[g.qt.col[e]];
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

Vector solve_dense(const ModelParams& params, int max_level) {
  const Matrix q = assemble_truncated_generator(params, max_level);
  const std::size_t n = q.rows();
  // Transposed balance system with the (0,0) equation replaced by pi e = 1.
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = q(j, i);
  }
  for (std::size_t j = 0; j < n; ++j) a(0, j) = 1.0;
  Vector b(n, 0.0);
  b[0] = 1.0;
  return solve_linear(a, b);
}

Vector solve_power(const SparseGenerator& g, double tol, long max_iter) {
  // Uniformized transition matrix P = I + Q / Lambda; its stationary vector
  // matches the chain's. The transposed CSR of P extends the incoming lists
  // with the diagonal entry of each balance equation.
  const double uniform_rate = 1.01 * std::max(g.max_exit, 1e-300);
  const std::size_t n = g.qt.size;
  kernels::CsrTransposed with_diag;
  with_diag.size = n;
  with_diag.row_start.assign(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    with_diag.row_start[j + 1] =
        with_diag.row_start[j] + (g.qt.row_start[j + 1] - g.qt.row_start[j]) + 1;
  }
  with_diag.col.resize(with_diag.row_start[n]);
  with_diag.val.resize(with_diag.row_start[n]);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t pos = with_diag.row_start[j];
    for (std::size_t e = g.qt.row_start[j]; e < g.qt.row_start[j + 1]; ++e) {
      with_diag.col[pos] = g.qt.col[e];
      with_diag.val[pos] = g.qt.val[e] / uniform_rate;
      ++pos;
    }
    with_diag.col[pos] = j;
    with_diag.val[pos] = 1.0 + g.diag[j] / uniform_rate;
  }
  // The gather matvec only pays off with a real thread budget; on narrow
  // machines the serial path wins well past 8k states (see dsq-bench).
  const auto exec = (kernels::max_threads() >= 4 && n >= 4096)
                        ? kernels::Exec::Parallel
                        : kernels::Exec::Serial;
  auto result =
      kernels::stationary_power_iteration(with_diag, tol, max_iter, exec);
  if (!result.converged) {
    throw ConvergenceError(
        "oracle power iteration: no convergence after " +
            std::to_string(result.iterations) + " iterations (change " +
            std::to_string(result.max_change) + ")",
        result.iterations, result.max_change);
  }
  return std::move(result.pi);
}

}  // namespace

OracleSolution solve_truncated(const ModelParams& params,
                               const OracleOptions& opts) {
  params.validate();
  if (opts.tail_tol <= 0.0) {
    throw std::invalid_argument("solve_truncated: tail_tol must be positive");
  }
  int level = opts.explicit_max_level > 0
                  ? std::max(opts.explicit_max_level, params.max_servers)
                  : std::max(4 * params.max_servers, 32);
  const bool pinned = opts.explicit_max_level > 0;

  for (;;) {
    const StateSpace space(params.max_servers, level);
    const std::size_t n = space.total_states();
    const SparseGenerator g = sparse_generator(params, level);

    Vector pi = n <= opts.dense_state_limit ? solve_dense(params, level)
                                            : solve_power(g, 1e-12, 5000000);

    // Scrub solver noise and renormalize exactly.
    for (double& v : pi) {
      if (v < 0.0) v = 0.0;
    }
    const double total = kernels::chunked_sum(pi);
    if (!(total > 0.0)) {
      throw ConvergenceError("solve_truncated: degenerate solution", 0, 0.0);
    }
    for (double& v : pi) v /= total;

    double tail = 0.0;
    for (std::size_t i = space.level_offset(std::max(level - 1, 0)); i < n; ++i) {
      tail += pi[i];
    }
    const double residual = balance_residual(g, pi);
    if (residual > 1e-10) {
      throw ConvergenceError("solve_truncated: balance residual " +
                                 std::to_string(residual) + " exceeds 1e-10",
                             0, residual);
    }

    if (pinned || tail < opts.tail_tol) {
      return OracleSolution{.params = params,
                            .max_level = level,
                            .pi = std::move(pi),
                            .tail_mass = tail,
                            .residual = residual,
                            .tail_ok = tail < opts.tail_tol,
                            .tail_tol = opts.tail_tol};
    }
    if (level >= opts.level_cap) {
      throw NearInstabilityError(
          "solve_truncated: tail mass " + std::to_string(tail) +
              " still above tolerance at level " + std::to_string(level) +
              "; parameters are unstable or too close to the drift boundary",
          level, tail);
    }
    level = std::min(level * 2, opts.level_cap);
  }
}

Metrics oracle_metrics(const OracleSolution& sol) {
  const StateSpace space = sol.space();
  Metrics m;
  for (std::size_t i = 0; i < sol.pi.size(); ++i) {
    const State s = space.state_of(i);
    const double p = sol.pi[i];
    m.expected_total_length += (s.customers + s.servers) * p;
    if (s.servers <= s.customers) {
      m.expected_customers_waiting += (s.customers - s.servers) * p;
      if (s.customers >= 1) m.delay_probability += p;
    }
  }
  if (sol.params.lambda_c > 0.0) {
    m.expected_wait = m.expected_customers_waiting / sol.params.lambda_c;
  } else {
    m.expected_wait = 0.0;
  }
  return m;
}

ComparisonReport compare_with_oracle(const SteadyState& ss,
                                     const OracleSolution& sol,
                                     double tolerance) {
  const StateSpace space = sol.space();
  ComparisonReport report;
  report.tolerance = tolerance;
  Vector geo;
  for (int level = 0; level <= sol.max_level; ++level) {
    if (level < ss.max_servers) {
      geo = ss.boundary[static_cast<std::size_t>(level)];
    } else {
      geo = vecmat(geo, ss.R);  // same recursion as level_distribution
    }
    const int phases = space.phase_count(level);
    double worst = 0.0;
    for (int k = 0; k < phases; ++k) {
      const double diff = std::abs(
          geo[static_cast<std::size_t>(k)] -
          sol.pi[space.level_offset(level) + static_cast<std::size_t>(k)]);
      worst = std::max(worst, diff);
    }
    report.per_level_max_diff.push_back(worst);
    if (worst > report.max_abs_diff) {
      report.max_abs_diff = worst;
      report.worst_level = level;
    }
  }
  report.pass = report.max_abs_diff <= tolerance;
  return report;
}

}  // namespace dsq

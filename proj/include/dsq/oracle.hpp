#pragma once

#include <vector>

#include "dsq/kernels.hpp"
#include "dsq/metrics.hpp"
#include "dsq/model.hpp"
#include "dsq/qbd.hpp"

namespace dsq {

// Direct steady-state solve of the truncated chain. Independent of the
// matrix-geometric path and valid for level-dependent rates.
struct OracleSolution {
  ModelParams params;
  int max_level = 0;
  Vector pi;                // over all truncated states, level-major
  double tail_mass = 0.0;   // mass of the top two levels
  double residual = 0.0;    // max |pi Q| entry over the truncated generator
  bool tail_ok = false;     // tail_mass below the requested tolerance
  double tail_tol = 0.0;

  StateSpace space() const { return {params.max_servers, max_level}; }
};

struct OracleOptions {
  double tail_tol = 1e-12;
  // 0 = start at max(4K, 32) and double until the tail tolerance holds or
  // the level cap is hit; nonzero pins the truncation level (diagnostics).
  int explicit_max_level = 0;
  int level_cap = 4096;
  // Dense elimination up to this many states, uniformized power iteration above.
  std::size_t dense_state_limit = 2000;
};

// Solves pi Q = 0, pi e = 1 on the truncated state space, growing the
// truncation until the tail mass drops below tail_tol. Throws
// NearInstabilityError when the cap is reached with too much tail mass, and
// ConvergenceError if the iterative path stalls.
OracleSolution solve_truncated(const ModelParams& params,
                               const OracleOptions& opts = {});

// Metrics by direct summation over the truncated distribution.
Metrics oracle_metrics(const OracleSolution& sol);

struct ComparisonReport {
  std::vector<double> per_level_max_diff;
  double max_abs_diff = 0.0;
  int worst_level = -1;
  double tolerance = 0.0;
  bool pass = false;
};

// Entrywise comparison of the matrix-geometric distribution against the
// truncated solve, level by level up to the truncation.
ComparisonReport compare_with_oracle(const SteadyState& ss,
                                     const OracleSolution& sol,
                                     double tolerance = 1e-8);

}  // namespace dsq

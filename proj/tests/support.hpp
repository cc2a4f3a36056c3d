#pragma once

#include <cmath>
#include <vector>

#include "dsq/linalg.hpp"
#include "dsq/metrics.hpp"
#include "dsq/model.hpp"
#include "dsq/qbd.hpp"
#include "dsq/sim.hpp"

namespace testsupport {

// Stable parameter sets used by the solver/oracle agreement checks. All have
// spectral radius of R comfortably below 1 so the truncated solves stay
// cheap. The last entry has a level-dependent boundary with a constant tail
// from level 3 on, which the matrix-geometric solver must still handle.
inline std::vector<dsq::ModelParams> stable_parameter_grid() {
  using dsq::ModelParams;
  std::vector<ModelParams> grid = {
      ModelParams::simple(1.0, 2.0, 3.0, 4.0),    // Example 1
      ModelParams::simple(1.0, 1.0, 2.0, 1.0),    // first table row
      ModelParams::simple(1.0, 2.0, 2.0, 2.0),    // rho_s = 1 limit
      ModelParams::simple(1.0, 2.0, 2.0, 3.0),
      ModelParams::simple(1.0, 10.0, 1.0, 1.0),   // mostly empty system
      ModelParams::simple(0.5, 1.0, 0.5, 0.25),   // server-rich, rho_s = 2
      ModelParams::simple(2.0, 3.0, 5.0, 2.0),
      ModelParams::simple(0.9, 1.0, 3.0, 2.0),
      ModelParams::simple(1.2, 0.8, 4.0, 1.0),
      ModelParams::simple(0.3, 0.5, 0.7, 1.1),
  };
  ModelParams level_dep;
  level_dep.lambda_c = 1.0;
  level_dep.mu = 2.0;
  level_dep.server_arrival = {0.0, 2.0, 4.0, 3.0};  // 3.0 from level 3 on
  level_dep.server_departure = {5.0, 1.0, 2.0, 4.0};
  level_dep.max_servers = 3;
  grid.push_back(level_dep);
  return grid;
}

// Metric partial sums straight from the level distributions, cut off once a
// level's mass drops below tail_tol. Independent route around the
// (I - R)^{-1} closed forms.
struct SummedMetrics {
  double total_length = 0.0;
  double customers_waiting = 0.0;
  double delay_probability = 0.0;
  int levels_used = 0;
};

inline SummedMetrics metrics_by_truncated_sum(const dsq::SteadyState& ss,
                                              double tail_tol = 1e-12,
                                              int level_cap = 100000) {
  SummedMetrics out;
  for (int level = 0;; ++level) {
    const dsq::Vector pi = dsq::level_distribution(ss, level);
    double mass = 0.0;
    for (double p : pi) mass += p;
    for (int k = 0; k < static_cast<int>(pi.size()); ++k) {
      const double p = pi[static_cast<std::size_t>(k)];
      out.total_length += (level + k) * p;
      if (k <= level) {
        out.customers_waiting += (level - k) * p;
        if (level >= 1) out.delay_probability += p;
      }
    }
    out.levels_used = level + 1;
    if (level >= ss.max_servers && mass < tail_tol) break;
    if (level >= level_cap) break;
  }
  return out;
}

// Spectral radius by repeated squaring with renormalization:
// log rho = lim 2^{-k} log ||A^(2^k)||_inf, tracked in log scale.
inline double spectral_radius_by_squaring(const dsq::Matrix& a, int doublings = 40) {
  dsq::Matrix b = a;
  double log_scale = 0.0;
  double power = 1.0;
  for (int k = 0; k < doublings; ++k) {
    b = dsq::matmul(b, b);
    power *= 2.0;
    const double norm = dsq::inf_norm(b);
    if (norm == 0.0) return 0.0;
    log_scale = 2.0 * log_scale + std::log(norm);
    b = dsq::scale(b, 1.0 / norm);
    // log_scale now refers to A^(2^(k+1)) = exp(log_scale) * b.
  }
  return std::exp(log_scale / power);
}

// Uniform draw helpers on top of the artifact Rng.
inline double uniform_in(dsq::Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

inline dsq::Matrix random_matrix(dsq::Rng& rng, std::size_t n, double lo = -1.0,
                                 double hi = 1.0) {
  dsq::Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = uniform_in(rng, lo, hi);
  return m;
}

}  // namespace testsupport

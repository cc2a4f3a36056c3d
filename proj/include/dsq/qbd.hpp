#pragma once

#include <vector>

#include "dsq/linalg.hpp"
#include "dsq/model.hpp"
#include "dsq/stability.hpp"

namespace dsq {

// Matrix-geometric steady state: boundary vectors pi_0..pi_{K-1} plus the
// rate matrix R giving pi_n = pi_{K-1} R^(n-K+1) for n >= K. For K = 3 the
// boundary holds pi0 (len 2), pi1 (len 3), pi2 (len 4) and R is 4x4.
struct SteadyState {
  int max_servers = 3;
  std::vector<Vector> boundary;  // pi_0 .. pi_{K-1}, normalized
  Matrix R;
  double alpha = 0.0;  // normalization constant that was divided out
  long r_iterations = 0;
  double r_residual = 0.0;

  const Vector& pi0() const { return boundary[0]; }
  const Vector& pi1() const { return boundary[1]; }
  const Vector& pi2() const { return boundary[2]; }
};

struct RResult {
  Matrix R;
  long iterations = 0;
  double residual = 0.0;  // max |R^2 A0 + R A_repeat + A1| entry
};

// Minimal nonnegative solution of R^2 A0 + R A2 + A1 = 0 by the fixed-point
// iteration R <- -A1 A2^{-1} - R^2 A0 A2^{-1} started from R = 0. Converged
// when the successive-iterate max change is <= tol and the residual is
// <= 100 * tol.
RResult compute_R(const BlockSet& blocks, double tol = 1e-12,
                  long max_iter = 100000);

// Boundary balance equations with pi_K = pi_{K-1} R substituted, solved by
// pinning the (0,0) entry to 1, dropping that state's balance equation and
// solving the remaining square system. Returns unnormalized pi_0..pi_{K-1};
// throws ConvergenceError if the back-substituted residual of the full system
// exceeds residual_tol.
std::vector<Vector> solve_boundary(const BlockSet& blocks, const Matrix& R,
                                   double residual_tol = 1e-9);

// Divides by alpha = sum_j<K-1 pi_j e + pi_{K-1} (I - R)^{-1} e.
SteadyState normalize(std::vector<Vector> boundary, Matrix R);

// pi_n: boundary vector for n < K, pi_{K-1} R^(n-K+1) otherwise.
Vector level_distribution(const SteadyState& ss, int level);

struct SolveOptions {
  double r_tol = 1e-12;
  long r_max_iter = 100000;
  double boundary_tol = 1e-9;
};

// Full pipeline: ergodicity check, blocks, R, boundary, normalization.
// Unstable parameters raise UnstableModelError carrying the report.
SteadyState solve_qbd(const ModelParams& params, const SolveOptions& opts = {});

}  // namespace dsq

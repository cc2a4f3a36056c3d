#include "dsq/qbd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "dsq/errors.hpp"

namespace dsq {

RResult compute_R(const BlockSet& blocks, double tol, long max_iter) {
  const Matrix& a0 = blocks.a0;
  const Matrix& a1 = blocks.a1;
  const Matrix& a2 = blocks.a_repeat;
  const Matrix a2_inv = inverse(a2);
  const Matrix v = matmul(a1, a2_inv);
  const Matrix w = matmul(a0, a2_inv);
  const std::size_t n = a2.rows();

  auto residual_of = [&](const Matrix& r) {
    const Matrix lhs =
        add(add(matmul(matmul(r, r), a0), matmul(r, a2)), a1);
    return max_abs(lhs);
  };

  // Rounding can flip an exact-zero entry of an iterate to -1e-17-ish; zero
  // those so the nonnegativity invariant survives. Genuine negatives stay.
  auto settle = [](Matrix m) {
    const double floor = -1e-13 * std::max(1.0, max_abs(m));
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (m(i, j) < 0.0 && m(i, j) > floor) m(i, j) = 0.0;
    return m;
  };

  Matrix r(n, n);
  long iterations = 0;
  double residual = residual_of(r);
  // Base criterion: successive-iterate change <= tol and equation residual
  // <= 100 tol. Near criticality the iterate change understates the distance
  // to the fixed point by ~1/(1 - sp(R)), so once the base criterion fires
  // the target is tightened accordingly and refinement continues (with a
  // stall guard at the floating-point floor).
  double change_target = tol;
  bool target_final = false;
  double prev_change = std::numeric_limits<double>::infinity();
  int stalled = 0;
  while (iterations < max_iter) {
    const Matrix next =
        settle(subtract(scale(v, -1.0), matmul(matmul(r, r), w)));
    ++iterations;
    const double change = max_abs_diff(next, r);
    r = next;
    if (change >= prev_change) {
      if (++stalled >= 50) break;
    } else {
      stalled = 0;
    }
    prev_change = change;
    if (change <= change_target) {
      if (!target_final) {
        const double radius = spectral_radius_estimate(r).value;
        change_target = std::max(tol * std::min(1.0, 1.0 - radius), 5e-16);
        target_final = true;
        if (change > change_target) continue;
      }
      residual = residual_of(r);
      if (residual <= 100.0 * tol) {
        return {r, iterations, residual};
      }
    }
  }
  residual = residual_of(r);
  if (stalled >= 50 && residual <= 100.0 * tol) {
    // Hit the floating-point floor with the equation satisfied.
    return {r, iterations, residual};
  }
  char msg[160];
  std::snprintf(msg, sizeof(msg),
                "compute_R: no convergence after %ld iterations (residual %.3e)",
                iterations, residual);
  throw ConvergenceError(msg, iterations, residual);
}

namespace {

// Assembles the boundary balance block matrix M with pi_K = pi_{K-1} R
// substituted: row blocks are levels, column blocks are balance equations.
Matrix boundary_system(const BlockSet& blocks, const Matrix& R) {
  const int k = blocks.max_servers;
  std::vector<std::size_t> offsets(static_cast<std::size_t>(k) + 1, 0);
  for (int i = 0; i < k; ++i) {
    offsets[static_cast<std::size_t>(i) + 1] =
        offsets[static_cast<std::size_t>(i)] + blocks.local[static_cast<std::size_t>(i)].rows();
  }
  const std::size_t n = offsets.back();
  Matrix m(n, n);
  auto put = [&](int level_row, int level_col, const Matrix& block) {
    const std::size_t ro = offsets[static_cast<std::size_t>(level_row)];
    const std::size_t co = offsets[static_cast<std::size_t>(level_col)];
    for (std::size_t i = 0; i < block.rows(); ++i)
      for (std::size_t j = 0; j < block.cols(); ++j) m(ro + i, co + j) = block(i, j);
  };
  for (int level = 0; level < k; ++level) {
    if (level + 1 < k) put(level, level + 1, blocks.up[static_cast<std::size_t>(level)]);
    if (level > 0) put(level, level - 1, blocks.down[static_cast<std::size_t>(level - 1)]);
    if (level + 1 < k) {
      put(level, level, blocks.local[static_cast<std::size_t>(level)]);
    } else {
      // Level K-1 balance picks up the tail flow through R * A0.
      put(level, level,
          add(blocks.local[static_cast<std::size_t>(level)],
              matmul(R, blocks.down[static_cast<std::size_t>(level)])));
    }
  }
  return m;
}

}  // namespace

std::vector<Vector> solve_boundary(const BlockSet& blocks, const Matrix& R,
                                   double residual_tol) {
  const int k = blocks.max_servers;
  if (!blocks.level_dependent.empty()) {
    throw std::invalid_argument(
        "solve_boundary: rates must be constant from level K on");
  }
  const Matrix m = boundary_system(blocks, R);
  const Matrix mt = transpose(m);
  const std::size_t n = mt.rows();

  // Pin pi(0,0) = 1: move the first column to the right-hand side and drop
  // the (0,0) balance equation, leaving an (n-1) x (n-1) system.
  Matrix reduced(n - 1, n - 1);
  Vector rhs(n - 1, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    rhs[i - 1] = -mt(i, 0);
    for (std::size_t j = 1; j < n; ++j) reduced(i - 1, j - 1) = mt(i, j);
  }
  const Vector x = solve_linear(reduced, rhs);

  Vector full(n, 0.0);
  full[0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) full[i] = x[i - 1];

  // Back-substitute into all n equations, including the dropped one. The
  // tolerance is absolute at the pinned pi(0,0) = 1 scale and widens with the
  // solution magnitude when the pinned state is far from modal.
  const Vector check = vecmat(full, m);
  double worst = 0.0;
  double x_scale = 0.0;
  for (double v : check) worst = std::max(worst, std::abs(v));
  for (double v : full) x_scale = std::max(x_scale, std::abs(v));
  if (worst > residual_tol * std::max(1.0, x_scale)) {
    char msg[120];
    std::snprintf(msg, sizeof(msg),
                  "solve_boundary: balance residual %.3e exceeds tolerance %.3e",
                  worst, residual_tol * std::max(1.0, x_scale));
    throw ConvergenceError(msg, 0, worst);
  }

  std::vector<Vector> boundary;
  std::size_t pos = 0;
  for (int level = 0; level < k; ++level) {
    const std::size_t phases = blocks.local[static_cast<std::size_t>(level)].rows();
    boundary.emplace_back(full.begin() + static_cast<std::ptrdiff_t>(pos),
                          full.begin() + static_cast<std::ptrdiff_t>(pos + phases));
    pos += phases;
  }
  return boundary;
}

SteadyState normalize(std::vector<Vector> boundary, Matrix R) {
  if (boundary.empty()) {
    throw std::invalid_argument("normalize: boundary vectors required");
  }
  const auto radius = spectral_radius_estimate(R);
  if (radius.value >= 1.0) {
    throw std::invalid_argument(
        "normalize: spectral radius of R is " + std::to_string(radius.value) +
        " >= 1, tail mass is not summable");
  }
  const Matrix ir_inv = inverse(subtract(Matrix::identity(R.rows()), R));
  const Vector e(R.rows(), 1.0);

  double alpha = 0.0;
  for (std::size_t level = 0; level + 1 < boundary.size(); ++level) {
    alpha += sum(boundary[level]);
  }
  alpha += dot(vecmat(boundary.back(), ir_inv), e);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("normalize: total mass is not positive");
  }
  for (Vector& level : boundary) {
    for (double& v : level) v /= alpha;
  }
  SteadyState ss{.max_servers = static_cast<int>(boundary.size()),
                 .boundary = std::move(boundary),
                 .R = std::move(R),
                 .alpha = alpha,
                 .r_iterations = 0,
                 .r_residual = 0.0};
  return ss;
}

Vector level_distribution(const SteadyState& ss, int level) {
  if (level < 0) throw std::invalid_argument("level_distribution: level must be >= 0");
  const int k = ss.max_servers;
  if (level < k) return ss.boundary[static_cast<std::size_t>(level)];
  Vector pi = ss.boundary.back();
  for (int i = k - 1; i < level; ++i) pi = vecmat(pi, ss.R);
  return pi;
}

SteadyState solve_qbd(const ModelParams& params, const SolveOptions& opts) {
  params.validate();
  if (!params.constant_from(params.max_servers)) {
    throw std::invalid_argument(
        "solve_qbd: analytic solve needs rates constant from level K on; use the "
        "truncated oracle or the simulator for level-dependent tails");
  }
  const StabilityReport report = ergodicity(params);
  if (!report.stable) throw UnstableModelError(report);

  const BlockSet blocks = build_blocks(params);
  RResult r = compute_R(blocks, opts.r_tol, opts.r_max_iter);
  std::vector<Vector> boundary =
      solve_boundary(blocks, r.R, opts.boundary_tol);
  SteadyState ss = normalize(std::move(boundary), std::move(r.R));
  ss.r_iterations = r.iterations;
  ss.r_residual = r.residual;

  double mass = 0.0;
  for (std::size_t level = 0; level + 1 < ss.boundary.size(); ++level) {
    mass += sum(ss.boundary[level]);
  }
  mass += dot(vecmat(ss.boundary.back(),
                     inverse(subtract(Matrix::identity(ss.R.rows()), ss.R))),
              Vector(ss.R.rows(), 1.0));
  if (std::abs(mass - 1.0) > 1e-10) {
    throw ConvergenceError("solve_qbd: normalized mass " + std::to_string(mass) +
                               " deviates from 1",
                           r.iterations, std::abs(mass - 1.0));
  }
  for (const Vector& level : ss.boundary) {
    for (double v : level) {
      if (v < -1e-12) {
        throw ConvergenceError("solve_qbd: negative probability " +
                                   std::to_string(v) + " in boundary vector",
                               r.iterations, -v);
      }
    }
  }
  return ss;
}

}  // namespace dsq

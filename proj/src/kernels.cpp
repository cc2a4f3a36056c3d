#include "dsq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dsq/errors.hpp"

namespace dsq::kernels {

namespace {
constexpr std::size_t kSumChunk = 4096;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void gather_matvec(const CsrTransposed& at, std::span<const double> x,
                   std::span<double> y, Exec exec) {
  if (x.size() != at.size || y.size() != at.size) {
    throw std::invalid_argument("gather_matvec: size mismatch");
  }
  const auto n = static_cast<std::int64_t>(at.size);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t e = at.row_start[r]; e < at.row_start[r + 1]; ++e) {
        acc += at.val[e] * x[at.col[e]];
      }
      y[r] = acc;
    }
  } else {
    for (std::int64_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t e = at.row_start[r]; e < at.row_start[r + 1]; ++e) {
        acc += at.val[e] * x[at.col[e]];
      }
      y[r] = acc;
    }
  }
}

double chunked_sum(std::span<const double> v) {
  const std::size_t chunks = (v.size() + kSumChunk - 1) / kSumChunk;
  if (chunks <= 1) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
  }
  std::vector<double> partial(chunks, 0.0);
  const auto nc = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < nc; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kSumChunk;
    const std::size_t hi = std::min(lo + kSumChunk, v.size());
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += v[i];
    partial[c] = acc;
  }
  double total = 0.0;
  for (double x : partial) total += x;
  return total;
}

PowerIterationResult stationary_power_iteration(const CsrTransposed& pt,
                                                double tol, long max_iter,
                                                Exec exec) {
  const std::size_t n = pt.size;
  PowerIterationResult res;
  res.pi.assign(n, 1.0 / static_cast<double>(n));
  Vector next(n, 0.0);
  for (long it = 1; it <= max_iter; ++it) {
    gather_matvec(pt, res.pi, next, exec);
    const double total = chunked_sum(next);
    double change = 0.0;
    const auto sz = static_cast<std::int64_t>(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static) reduction(max : change)
      for (std::int64_t i = 0; i < sz; ++i) {
        next[i] /= total;
        change = std::max(change, std::abs(next[i] - res.pi[i]));
      }
    } else {
      for (std::int64_t i = 0; i < sz; ++i) {
        next[i] /= total;
        change = std::max(change, std::abs(next[i] - res.pi[i]));
      }
    }
    std::swap(res.pi, next);
    res.iterations = it;
    res.max_change = change;
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Vector solve_linear(Matrix a, Vector b, Exec exec) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("solve_linear: matrix must be square");
  }
  if (b.size() != a.rows()) {
    throw std::invalid_argument("solve_linear: right-hand side length mismatch");
  }
  const std::size_t n = a.rows();

  std::vector<double> row_scale(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row_scale[i] = std::max(row_scale[i], std::abs(a(i, j)));
    }
  }

  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    }
    if (pivot != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(pivot, j));
      std::swap(b[c], b[pivot]);
      std::swap(row_scale[c], row_scale[pivot]);
    }
    const double p = a(c, c);
    if (std::abs(p) < 1e-13 * row_scale[c] || p == 0.0) {
      throw SingularMatrixError(
          "solve_linear: matrix is singular to working precision", p,
          row_scale[c]);
    }
    const auto nn = static_cast<std::int64_t>(n);
    const auto cc = static_cast<std::int64_t>(c);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
      for (std::int64_t r = cc + 1; r < nn; ++r) {
        const double f = a(r, c) / p;
        if (f == 0.0) continue;
        a(r, c) = 0.0;
        for (std::size_t j = c + 1; j < n; ++j) a(r, j) -= f * a(c, j);
        b[r] -= f * b[c];
      }
    } else {
      for (std::int64_t r = cc + 1; r < nn; ++r) {
        const double f = a(r, c) / p;
        if (f == 0.0) continue;
        a(r, c) = 0.0;
        for (std::size_t j = c + 1; j < n; ++j) a(r, j) -= f * a(c, j);
        b[r] -= f * b[c];
      }
    }
  }

  Vector x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= a(ii, j) * x[j];
    x[ii] = acc / a(ii, ii);
  }
  return x;
}

}  // namespace dsq::kernels

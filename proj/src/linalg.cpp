#include "dsq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsq/kernels.hpp"

namespace dsq {

namespace {

void check_finite(const std::vector<double>& entries) {
  for (double v : entries) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("matrix entries must be finite");
    }
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("matrix dimensions must be at least 1x1");
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("matrix dimensions must be at least 1x1");
  }
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("entry count does not match dimensions");
  }
  check_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  check_finite(m.data_);
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        c(i, j) += aik * b(k, j);
      }
    }
  }
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("add: shape mismatch");
  }
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("subtract: shape mismatch");
  }
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) * s;
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Vector vecmat(const Vector& x, const Matrix& a) {
  if (x.size() != a.rows()) {
    throw std::invalid_argument("vecmat: length does not match row count");
  }
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += xi * a(i, j);
  }
  return y;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (x.size() != a.cols()) {
    throw std::invalid_argument("matvec: length does not match column count");
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const Vector& a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

double inf_norm(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) r += std::abs(a(i, j));
    m = std::max(m, r);
  }
  return m;
}

Vector solve_linear(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("solve_linear: matrix must be square");
  }
  if (b.size() != a.rows()) {
    throw std::invalid_argument("solve_linear: right-hand side length mismatch");
  }
  const auto exec = a.rows() >= kernels::kParallelSolveThreshold
                        ? kernels::Exec::Parallel
                        : kernels::Exec::Serial;
  return kernels::solve_linear(a, b, exec);
}

Matrix inverse(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("inverse: matrix must be square");
  }
  const std::size_t n = a.rows();
  Matrix work = a;
  Matrix inv = Matrix::identity(n);

  // Row scales from the original matrix, permuted alongside the rows.
  std::vector<double> row_scale(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row_scale[i] = std::max(row_scale[i], std::abs(work(i, j)));
    }
  }

  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(work(r, c)) > std::abs(work(pivot, c))) pivot = r;
    }
    if (pivot != c) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(work(c, j), work(pivot, j));
        std::swap(inv(c, j), inv(pivot, j));
      }
      std::swap(row_scale[c], row_scale[pivot]);
    }
    const double p = work(c, c);
    if (std::abs(p) < 1e-13 * row_scale[c] || p == 0.0) {
      throw SingularMatrixError("inverse: matrix is singular to working precision",
                                p, row_scale[c]);
    }
    const double pinv = 1.0 / p;
    for (std::size_t j = 0; j < n; ++j) {
      work(c, j) *= pinv;
      inv(c, j) *= pinv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = work(r, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        work(r, j) -= f * work(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

SpectralRadiusEstimate spectral_radius_estimate(const Matrix& a, double rel_tol,
                                                int max_iter) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("spectral_radius_estimate: matrix must be square");
  }
  for (double v : a.data()) {
    if (v < 0.0) {
      throw std::invalid_argument(
          "spectral_radius_estimate: matrix must be entrywise nonnegative");
    }
  }
  const std::size_t n = a.rows();
  Vector v(n, 1.0);
  double estimate = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = matvec(a, v);
    double norm = 0.0;
    for (double x : w) norm = std::max(norm, x);
    if (norm == 0.0) {
      // Reached the kernel; only nilpotent directions remain.
      return {0.0, true, it};
    }
    const double prev = estimate;
    estimate = norm;
    for (double& x : w) x /= norm;
    v = std::move(w);
    if (it > 1 && std::abs(estimate - prev) <= rel_tol * std::abs(estimate)) {
      return {estimate, true, it};
    }
  }
  return {estimate, false, max_iter};
}

}  // namespace dsq

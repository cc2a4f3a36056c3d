#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsq/errors.hpp"

namespace dsq {

using Vector = std::vector<double>;

// Dense real matrix, row-major. Constructors reject non-finite entries and
// empty shapes; everything downstream can assume a well-formed value.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix transpose(const Matrix& a);

// x treated as a row vector: returns x * a.
Vector vecmat(const Vector& x, const Matrix& a);
// Returns a * x for a column vector x.
Vector matvec(const Matrix& a, const Vector& x);

double dot(const Vector& a, const Vector& b);
double sum(const Vector& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
// Maximum absolute row sum.
double inf_norm(const Matrix& a);

// Gaussian elimination with scaled partial pivoting. Pivots smaller than
// 1e-13 times the row scale raise SingularMatrixError.
Vector solve_linear(const Matrix& a, const Vector& b);

// Gauss-Jordan inverse with the same pivoting policy as solve_linear.
Matrix inverse(const Matrix& a);

struct SpectralRadiusEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Power iteration for entrywise nonnegative matrices. Non-convergence after
// max_iter is reported in-band, never thrown.
SpectralRadiusEstimate spectral_radius_estimate(const Matrix& a,
                                                double rel_tol = 1e-10,
                                                int max_iter = 10000);

}  // namespace dsq

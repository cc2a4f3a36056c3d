#pragma once

#include <stdexcept>
#include <string>

namespace dsq {

// Matrix is singular to working precision (pivot below threshold * row scale).
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(std::string what, double pivot, double scale)
      : std::runtime_error(std::move(what)), pivot_(pivot), scale_(scale) {}

  double pivot() const { return pivot_; }
  double scale() const { return scale_; }

 private:
  double pivot_ = 0.0;
  double scale_ = 0.0;
};

// An iterative scheme hit its iteration cap before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string what, long iterations, double residual)
      : std::runtime_error(std::move(what)),
        iterations_(iterations),
        residual_(residual) {}

  long iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  long iterations_ = 0;
  double residual_ = 0.0;
};

// Truncated solve could not push the tail mass below tolerance by the level cap.
class NearInstabilityError : public std::runtime_error {
 public:
  NearInstabilityError(std::string what, int max_level, double tail_mass)
      : std::runtime_error(std::move(what)),
        max_level_(max_level),
        tail_mass_(tail_mass) {}

  int max_level() const { return max_level_; }
  double tail_mass() const { return tail_mass_; }

 private:
  int max_level_ = 0;
  double tail_mass_ = 0.0;
};

}  // namespace dsq

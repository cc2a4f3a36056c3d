#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsq/linalg.hpp"

namespace dsq::kernels {

// Execution mode for the data-parallel kernels. Serial is the reference
// implementation; Parallel uses OpenMP and is arranged so that every output
// element is computed with the same floating-point operation order as the
// serial path, making results bit-identical across thread counts.
enum class Exec { Serial, Parallel };

// Compressed sparse rows over the *incoming* transitions: row r lists the
// entries of column r of the original matrix. Stored this way, a left
// product y = x * A becomes an independent gather per output element.
struct CsrTransposed {
  std::size_t size = 0;
  std::vector<std::size_t> row_start;  // size + 1
  std::vector<std::size_t> col;        // source index per entry
  std::vector<double> val;
};

// y[r] = sum over entries of row r of val * x[col].
void gather_matvec(const CsrTransposed& at, std::span<const double> x,
                   std::span<double> y, Exec exec);

// Fixed-chunk pairwise sum; result does not depend on thread count.
double chunked_sum(std::span<const double> v);

struct PowerIterationResult {
  Vector pi;
  long iterations = 0;
  double max_change = 0.0;
  double residual = 0.0;  // max |pi Q| entry, filled by the caller if needed
  bool converged = false;
};

// Stationary vector of a stochastic matrix P given as CsrTransposed, by
// repeated left multiplication with renormalization. Stops when the max
// entry change drops below tol.
PowerIterationResult stationary_power_iteration(const CsrTransposed& pt,
                                                double tol, long max_iter,
                                                Exec exec);

// Gaussian elimination with scaled partial pivoting. The parallel variant
// distributes row updates; each row's arithmetic is unchanged, so serial and
// parallel results are bit-identical.
Vector solve_linear(Matrix a, Vector b, Exec exec);

// Threshold above which dsq::solve_linear dispatches to the parallel path.
// Row updates below ~600 unknowns are too small to amortize the fork/join
// cost (see dsq-bench).
inline constexpr std::size_t kParallelSolveThreshold = 600;

// OpenMP thread budget; 1 when built without OpenMP.
int max_threads();

}  // namespace dsq::kernels

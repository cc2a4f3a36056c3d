#include "dsq/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dsq {

namespace {

struct TailOperators {
  Matrix ir_inv;   // (I - R)^{-1}
  Matrix ir_inv2;  // (I - R)^{-2}
  Vector e;
  Vector v;        // (0, 1, ..., K)
};

TailOperators tail_operators(const SteadyState& ss) {
  const std::size_t phases = ss.R.rows();
  TailOperators ops{
      .ir_inv = inverse(subtract(Matrix::identity(phases), ss.R)),
      .ir_inv2 = Matrix(phases, phases),
      .e = Vector(phases, 1.0),
      .v = Vector(phases, 0.0),
  };
  ops.ir_inv2 = matmul(ops.ir_inv, ops.ir_inv);
  for (std::size_t i = 0; i < phases; ++i) ops.v[i] = static_cast<double>(i);
  return ops;
}

}  // namespace

double expected_total_length(const SteadyState& ss) {
  const int m = ss.max_servers - 1;  // tail anchored at pi_m
  const auto ops = tail_operators(ss);
  const Vector& pi_m = ss.boundary.back();

  double total = 0.0;
  for (int level = 0; level < m; ++level) {
    const Vector& pi = ss.boundary[static_cast<std::size_t>(level)];
    for (std::size_t k = 0; k < pi.size(); ++k) {
      total += (level + static_cast<double>(k)) * pi[k];
    }
  }
  // sum_{n>=m} n R^{n-m} = R (I-R)^{-2} + m (I-R)^{-1}
  const Matrix counts =
      add(matmul(ss.R, ops.ir_inv2), scale(ops.ir_inv, static_cast<double>(m)));
  total += dot(vecmat(pi_m, counts), ops.e);
  total += dot(vecmat(pi_m, ops.ir_inv), ops.v);
  return total;
}

double expected_customers_waiting(const SteadyState& ss) {
  const int k_cap = ss.max_servers;
  const int m = k_cap - 1;
  const auto ops = tail_operators(ss);
  const Vector& pi_m = ss.boundary.back();

  // Boundary levels 1..K-1: only k <= n states hold waiting customers;
  // dormant k = n + 1 contributes zero.
  double total = 0.0;
  for (int level = 1; level <= m; ++level) {
    const Vector& pi = ss.boundary[static_cast<std::size_t>(level)];
    for (int k = 0; k <= level && k < static_cast<int>(pi.size()); ++k) {
      total += (level - k) * pi[static_cast<std::size_t>(k)];
    }
  }
  // Tail levels n >= K have every phase k <= K <= n:
  // sum_{n>=K} n R^{n-m} = R (I-R)^{-2} + m (I-R)^{-1} - m I
  Matrix counts = add(matmul(ss.R, ops.ir_inv2),
                      scale(ops.ir_inv, static_cast<double>(m)));
  counts = subtract(counts, scale(Matrix::identity(ss.R.rows()),
                                  static_cast<double>(m)));
  const Matrix geo_tail = subtract(ops.ir_inv, Matrix::identity(ss.R.rows()));
  total += dot(vecmat(pi_m, counts), ops.e);
  total -= dot(vecmat(pi_m, geo_tail), ops.v);
  return total;
}

double expected_wait(const SteadyState& ss, const ModelParams& params) {
  if (params.lambda_c <= 0.0) {
    throw std::invalid_argument(
        "expected_wait: undefined for lambda_c = 0 (no arrivals)");
  }
  return expected_customers_waiting(ss) / params.lambda_c;
}

double delay_probability(const SteadyState& ss) {
  const int m = ss.max_servers - 1;
  const auto ops = tail_operators(ss);
  const Vector& pi_m = ss.boundary.back();

  double total = 0.0;
  for (int level = 1; level <= m; ++level) {
    const Vector& pi = ss.boundary[static_cast<std::size_t>(level)];
    for (int k = 0; k <= level && k < static_cast<int>(pi.size()); ++k) {
      total += pi[static_cast<std::size_t>(k)];
    }
  }
  // Levels n >= K in full: pi_m ((I-R)^{-1} - I) e.
  const Matrix geo_tail = subtract(ops.ir_inv, Matrix::identity(ss.R.rows()));
  total += dot(vecmat(pi_m, geo_tail), ops.e);
  return total;
}

Metrics compute_metrics(const SteadyState& ss, const ModelParams& params) {
  Metrics m;
  m.expected_total_length = expected_total_length(ss);
  m.expected_customers_waiting = expected_customers_waiting(ss);
  m.expected_wait = expected_wait(ss, params);
  m.delay_probability = delay_probability(ss);
  return m;
}

}  // namespace dsq

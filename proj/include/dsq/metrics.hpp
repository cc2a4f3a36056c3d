#pragma once

#include "dsq/model.hpp"
#include "dsq/qbd.hpp"

namespace dsq {

// Steady-state performance measures. Queue length counts servers as well as
// customers (an observer cannot tell them apart); waiting customers are the
// max(n - k, 0) excess, and the delay probability is the mass of states
// where an arriving customer cannot start service at once.
struct Metrics {
  double expected_total_length = 0.0;      // E(L), customers + servers
  double expected_customers_waiting = 0.0; // E(Ln)
  double expected_wait = 0.0;              // E(W) = E(Ln) / lambda_c
  double delay_probability = 0.0;          // Pi_w over {n >= 1, k <= n}
};

double expected_total_length(const SteadyState& ss);
double expected_customers_waiting(const SteadyState& ss);
double expected_wait(const SteadyState& ss, const ModelParams& params);
double delay_probability(const SteadyState& ss);

Metrics compute_metrics(const SteadyState& ss, const ModelParams& params);

}  // namespace dsq

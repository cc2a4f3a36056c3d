#pragma once

#include "dsq/linalg.hpp"
#include "dsq/model.hpp"

namespace dsq {

// Drift analysis of the repeating section A = A0 + A1 + A_repeat.
struct StabilityReport {
  double rho_c = 0.0;
  double rho_s = 0.0;
  Vector pi_a;              // stationary distribution of A, length K + 1
  double up_drift = 0.0;    // pi_a * A1 * e
  double down_drift = 0.0;  // pi_a * A0 * e
  double threshold = 0.0;   // stability bound on rho_c
  bool stable = false;      // rho_c < threshold, equality counts as unstable
};

// Stationary distribution of the repeating-section generator: a birth-death
// chain on 0..K with up rate lambda_s and down rate mu_s, so
// pi_a[i] = rho_s^i / sum_j rho_s^j. That form equals the usual
// (1 - rho_s) / (1 - rho_s^(K+1)) quotient and stays exact at rho_s = 1.
Vector stationary_of_A(const ModelParams& params);

// Closed-form drift threshold: sum_{i=1..K} i rho_s^i / sum_{i=0..K} rho_s^i.
double drift_threshold(double rho_s, int max_servers);

StabilityReport ergodicity(const ModelParams& params);

// Thrown when an analytic solve is requested for a non-ergodic model.
class UnstableModelError : public std::runtime_error {
 public:
  explicit UnstableModelError(StabilityReport report)
      : std::runtime_error("model is not stable: rho_c = " +
                           std::to_string(report.rho_c) + " >= threshold " +
                           std::to_string(report.threshold)),
        report_(std::move(report)) {}

  const StabilityReport& report() const { return report_; }

 private:
  StabilityReport report_;
};

}  // namespace dsq

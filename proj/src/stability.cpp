#include "dsq/stability.hpp"

#include <cmath>
#include <stdexcept>

namespace dsq {

Vector stationary_of_A(const ModelParams& params) {
  params.validate();
  if (!params.constant_from(params.max_servers)) {
    throw std::invalid_argument(
        "stationary_of_A: rates must be constant from level K on");
  }
  const double rho = params.rho_s();
  const int k = params.max_servers;
  Vector pi(static_cast<std::size_t>(k) + 1, 0.0);
  double power = 1.0;
  double total = 0.0;
  for (int i = 0; i <= k; ++i) {
    pi[static_cast<std::size_t>(i)] = power;
    total += power;
    power *= rho;
  }
  for (double& v : pi) v /= total;
  return pi;
}

double drift_threshold(double rho_s, int max_servers) {
  double numer = 0.0;
  double denom = 0.0;
  double power = 1.0;
  for (int i = 0; i <= max_servers; ++i) {
    denom += power;
    numer += i * power;
    power *= rho_s;
  }
  return numer / denom;
}

StabilityReport ergodicity(const ModelParams& params) {
  StabilityReport report;
  report.rho_c = params.rho_c();
  report.rho_s = params.rho_s();
  report.pi_a = stationary_of_A(params);
  report.threshold = drift_threshold(report.rho_s, params.max_servers);

  // Drift computed from the actual repeating blocks, cross-checking the
  // closed form: A1 = lambda_c I, A0 = diag(0, mu, ..., K mu).
  const std::size_t phases = report.pi_a.size();
  Matrix a1 = scale(Matrix::identity(phases), params.lambda_c);
  Matrix a0(phases, phases);
  for (std::size_t i = 1; i < phases; ++i) {
    a0(i, i) = static_cast<double>(i) * params.mu;
  }
  const Vector e(phases, 1.0);
  report.up_drift = dot(vecmat(report.pi_a, a1), e);
  report.down_drift = dot(vecmat(report.pi_a, a0), e);
  report.stable = report.rho_c < report.threshold;
  return report;
}

}  // namespace dsq

#pragma once

#include <optional>
#include <vector>

#include "dsq/linalg.hpp"

namespace dsq {

// Arrival/service rates for customers and servers. Server rates are per-level
// sequences indexed by the number of customers n; the last element repeats for
// all higher levels, so a single-element sequence is the constant-rate case.
struct ModelParams {
  double lambda_c = 0.0;                 // customer arrival rate
  double mu = 0.0;                       // per-server service rate
  std::vector<double> server_arrival;    // lambda_s by level, last repeats
  std::vector<double> server_departure;  // mu_s by level, last repeats
  int max_servers = 3;                   // K

  static ModelParams simple(double lambda_c, double mu, double lambda_s,
                            double mu_s, int max_servers = 3);

  double lambda_s_at(int level) const;
  double mu_s_at(int level) const;
  double lambda_s_tail() const { return server_arrival.back(); }
  double mu_s_tail() const { return server_departure.back(); }

  double rho_c() const { return lambda_c / mu; }
  double rho_s() const { return lambda_s_tail() / mu_s_tail(); }

  // True when both per-level sequences are constant from `level` on.
  bool constant_from(int level) const;

  // Throws std::invalid_argument on any malformed field.
  void validate() const;
};

// System state: n customers, k servers, with k <= min(n + 1, K).
struct State {
  int customers = 0;  // n
  int servers = 0;    // k

  friend bool operator==(const State&, const State&) = default;
};

bool is_valid_state(const ModelParams& params, State s);

// Flat indexing of the level/phase space truncated at max_level. Levels are
// laid out in order; level n has min(n + 1, K) + 1 phases.
class StateSpace {
 public:
  StateSpace(int max_servers, int max_level);

  int max_servers() const { return k_; }
  int max_level() const { return max_level_; }
  int phase_count(int level) const;
  std::size_t level_offset(int level) const;
  std::size_t total_states() const { return level_offset(max_level_ + 1); }

  std::size_t index_of(State s) const;
  State state_of(std::size_t index) const;

 private:
  int k_ = 3;
  int max_level_ = 0;
};

enum class TransitionKind {
  CustomerArrival,
  ServiceCompletion,
  ServerArrival,
  ServerDeparture,
};

struct Transition {
  State to;
  double rate = 0.0;
  TransitionKind kind = TransitionKind::CustomerArrival;
};

// Enabled transitions out of s, in fixed order: customer arrival, service
// completion, server arrival, server departure. Zero-rate transitions are
// omitted. Rules:
//   - customers arrive at lambda_c unconditionally;
//   - service completes at k * mu only when k <= n (a dormant configuration
//     k = n + 1 serves nobody);
//   - a server arrives at lambda_s(n) only when k < n and k < K;
//   - a server departs at mu_s(n) whenever k >= 1.
std::vector<Transition> transition_rates(const ModelParams& params, State s);

// Same enumeration into a caller-provided buffer (at most 4 entries);
// returns the count. Hot path for the simulator.
int enumerate_transitions(const ModelParams& params, State s,
                          Transition out[4]);

// Boundary and repeating blocks of the block-tridiagonal generator. Boundary
// levels are 0..K-1; from level K on the chain repeats with local block
// a_repeat (when rates have a constant tail from level K), up block a1 and
// down block a0. The named b**() accessors follow the K = 3 layout.
struct BlockSet {
  int max_servers = 3;
  std::vector<Matrix> local;  // local[i]: level i -> i, i = 0..K-1
  std::vector<Matrix> up;     // up[i]: level i -> i+1, i = 0..K-1
  std::vector<Matrix> down;   // down[i]: level i+1 -> i, i = 0..K-1
  Matrix a0;                  // repeating down block, diag(0, mu, ..., K*mu)
  Matrix a1;                  // repeating up block, lambda_c * I
  Matrix a_repeat;            // repeating local block (tail rates)
  // Local blocks for levels K..tail start when rates are level dependent
  // beyond level K; empty in the constant-tail case.
  std::vector<Matrix> level_dependent;

  const Matrix& b00() const { return local[0]; }
  const Matrix& b01() const { return up[0]; }
  const Matrix& b10() const { return down[0]; }
  const Matrix& b11() const { return local[1]; }
  const Matrix& b12() const { return up[1]; }
  const Matrix& b21() const { return down[1]; }
  const Matrix& b22() const { return local[2]; }
};

// Extracts all blocks from the rule-built generator; blocks are never
// hand-coded.
BlockSet build_blocks(const ModelParams& params);

// Generator over all states with n <= max_level. Customer arrivals are
// disabled at the top level so rows still sum to zero.
Matrix assemble_truncated_generator(const ModelParams& params, int max_level);

struct GeneratorReport {
  double max_abs_row_sum = 0.0;
  double min_off_diagonal = 0.0;
  int worst_row = -1;  // row attaining max_abs_row_sum, when failing
  bool pass = false;
};

GeneratorReport validate_generator(const Matrix& q, double tol = 1e-12);

}  // namespace dsq

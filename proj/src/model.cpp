#include "dsq/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsq {

ModelParams ModelParams::simple(double lambda_c, double mu, double lambda_s,
                                double mu_s, int max_servers) {
  ModelParams p;
  p.lambda_c = lambda_c;
  p.mu = mu;
  p.server_arrival = {lambda_s};
  p.server_departure = {mu_s};
  p.max_servers = max_servers;
  return p;
}

double ModelParams::lambda_s_at(int level) const {
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(level, 0)),
                                       server_arrival.size() - 1);
  return server_arrival[i];
}

double ModelParams::mu_s_at(int level) const {
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(level, 0)),
                                       server_departure.size() - 1);
  return server_departure[i];
}

bool ModelParams::constant_from(int level) const {
  const auto from = static_cast<std::size_t>(std::max(level, 0));
  for (std::size_t i = from; i + 1 < server_arrival.size(); ++i) {
    if (server_arrival[i] != server_arrival.back()) return false;
  }
  for (std::size_t i = from; i + 1 < server_departure.size(); ++i) {
    if (server_departure[i] != server_departure.back()) return false;
  }
  return true;
}

void ModelParams::validate() const {
  if (!std::isfinite(lambda_c) || lambda_c < 0.0) {
    throw std::invalid_argument("lambda_c must be finite and nonnegative");
  }
  if (!std::isfinite(mu) || mu <= 0.0) {
    throw std::invalid_argument("mu must be finite and positive");
  }
  if (server_arrival.empty()) {
    throw std::invalid_argument("server_arrival must have at least one level");
  }
  if (server_departure.empty()) {
    throw std::invalid_argument("server_departure must have at least one level");
  }
  for (double v : server_arrival) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("server_arrival rates must be finite and nonnegative");
    }
  }
  for (double v : server_departure) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw std::invalid_argument("server_departure rates must be finite and positive");
    }
  }
  if (max_servers < 1) {
    throw std::invalid_argument("max_servers must be at least 1");
  }
}

bool is_valid_state(const ModelParams& params, State s) {
  if (s.customers < 0 || s.servers < 0) return false;
  return s.servers <= std::min(s.customers + 1, params.max_servers);
}

StateSpace::StateSpace(int max_servers, int max_level)
    : k_(max_servers), max_level_(max_level) {
  if (max_servers < 1) throw std::invalid_argument("max_servers must be >= 1");
  if (max_level < 0) throw std::invalid_argument("max_level must be >= 0");
}

int StateSpace::phase_count(int level) const {
  return std::min(level + 1, k_) + 1;
}

std::size_t StateSpace::level_offset(int level) const {
  // Levels below K hold n + 2 phases, later levels K + 1 each.
  const auto n = static_cast<std::size_t>(level);
  const auto k = static_cast<std::size_t>(k_);
  if (n <= k) return n * (n + 3) / 2;
  return k * (k + 3) / 2 + (n - k) * (k + 1);
}

std::size_t StateSpace::index_of(State s) const {
  if (s.customers < 0 || s.customers > max_level_ || s.servers < 0 ||
      s.servers >= phase_count(s.customers)) {
    throw std::invalid_argument("index_of: state outside the truncated space");
  }
  return level_offset(s.customers) + static_cast<std::size_t>(s.servers);
}

State StateSpace::state_of(std::size_t index) const {
  if (index >= total_states()) {
    throw std::invalid_argument("state_of: index out of range");
  }
  int level = 0;
  // level_offset is cheap; max_level stays at desk scale.
  while (level_offset(level + 1) <= index) ++level;
  return State{level, static_cast<int>(index - level_offset(level))};
}

int enumerate_transitions(const ModelParams& params, State s,
                          Transition out[4]) {
  const int n = s.customers;
  const int k = s.servers;
  int count = 0;
  if (params.lambda_c > 0.0) {
    out[count++] = {State{n + 1, k}, params.lambda_c,
                    TransitionKind::CustomerArrival};
  }
  if (k >= 1 && k <= n) {
    out[count++] = {State{n - 1, k}, static_cast<double>(k) * params.mu,
                    TransitionKind::ServiceCompletion};
  }
  if (k < n && k < params.max_servers) {
    const double ls = params.lambda_s_at(n);
    if (ls > 0.0) {
      out[count++] = {State{n, k + 1}, ls, TransitionKind::ServerArrival};
    }
  }
  if (k >= 1) {
    out[count++] = {State{n, k - 1}, params.mu_s_at(n),
                    TransitionKind::ServerDeparture};
  }
  return count;
}

std::vector<Transition> transition_rates(const ModelParams& params, State s) {
  if (!is_valid_state(params, s)) {
    throw std::invalid_argument("transition_rates: invalid state (" +
                                std::to_string(s.customers) + "," +
                                std::to_string(s.servers) + ")");
  }
  Transition buf[4];
  const int count = enumerate_transitions(params, s, buf);
  return {buf, buf + count};
}

Matrix assemble_truncated_generator(const ModelParams& params, int max_level) {
  params.validate();
  if (max_level < params.max_servers) {
    throw std::invalid_argument("assemble_truncated_generator: max_level must be >= K");
  }
  const StateSpace space(params.max_servers, max_level);
  Matrix q(space.total_states(), space.total_states());
  Transition buf[4];
  for (std::size_t i = 0; i < space.total_states(); ++i) {
    const State s = space.state_of(i);
    const int count = enumerate_transitions(params, s, buf);
    for (int t = 0; t < count; ++t) {
      if (buf[t].to.customers > max_level) continue;  // arrivals off at the top
      const std::size_t j = space.index_of(buf[t].to);
      q(i, j) += buf[t].rate;
      q(i, i) -= buf[t].rate;
    }
  }
  return q;
}

namespace {

Matrix slice_block(const Matrix& q, const StateSpace& space, int level_row,
                   int level_col) {
  const int pr = space.phase_count(level_row);
  const int pc = space.phase_count(level_col);
  Matrix block(static_cast<std::size_t>(pr), static_cast<std::size_t>(pc));
  const std::size_t ro = space.level_offset(level_row);
  const std::size_t co = space.level_offset(level_col);
  for (int i = 0; i < pr; ++i) {
    for (int j = 0; j < pc; ++j) {
      block(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          q(ro + static_cast<std::size_t>(i), co + static_cast<std::size_t>(j));
    }
  }
  return block;
}

}  // namespace

BlockSet build_blocks(const ModelParams& params) {
  params.validate();
  const int k = params.max_servers;

  // Find where both rate sequences go constant; blocks repeat from there.
  int tail_start = k;
  while (!params.constant_from(tail_start)) ++tail_start;

  const int assemble_to = tail_start + 2;
  const Matrix q = assemble_truncated_generator(params, assemble_to);
  const StateSpace space(k, assemble_to);

  BlockSet blocks{.max_servers = k,
                  .local = {},
                  .up = {},
                  .down = {},
                  .a0 = slice_block(q, space, tail_start + 1, tail_start),
                  .a1 = slice_block(q, space, tail_start, tail_start + 1),
                  .a_repeat = slice_block(q, space, tail_start, tail_start),
                  .level_dependent = {}};
  for (int level = 0; level < k; ++level) {
    blocks.local.push_back(slice_block(q, space, level, level));
    blocks.up.push_back(slice_block(q, space, level, level + 1));
    blocks.down.push_back(slice_block(q, space, level + 1, level));
  }
  if (tail_start > k) {
    for (int level = k; level <= tail_start; ++level) {
      blocks.level_dependent.push_back(slice_block(q, space, level, level));
    }
  }
  return blocks;
}

GeneratorReport validate_generator(const Matrix& q, double tol) {
  if (q.rows() != q.cols()) {
    throw std::invalid_argument("validate_generator: matrix must be square");
  }
  GeneratorReport report;
  report.min_off_diagonal = 0.0;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < q.cols(); ++j) {
      row_sum += q(i, j);
      if (i != j) report.min_off_diagonal = std::min(report.min_off_diagonal, q(i, j));
    }
    if (std::abs(row_sum) > report.max_abs_row_sum) {
      report.max_abs_row_sum = std::abs(row_sum);
      report.worst_row = static_cast<int>(i);
    }
  }
  report.pass = report.max_abs_row_sum <= tol && report.min_off_diagonal >= -tol;
  if (report.pass) report.worst_row = -1;
  return report;
}

}  // namespace dsq

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsq/kernels.hpp"
#include "dsq/model.hpp"

namespace dsq {

// xoshiro256++ with splitmix64 seeding (Blackman & Vigna, public domain
// reference algorithms). Self-contained so trajectories are reproducible
// across standard libraries; streams are split by (seed, stream) so
// independent runs never share state.
class Rng {
 public:
  static Rng from_seed(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();
  // Uniform on (0, 1]; never returns 0 so log() is safe.
  double uniform01();
  double exponential(double rate);

 private:
  std::uint64_t s_[4] = {};
};

struct SimConfig {
  std::uint64_t seed = 1;
  double horizon = 0.0;
  // Simulated time discarded before averaging; negative means 10% of horizon.
  double warmup = -1.0;
  State initial_state{0, 0};
  std::optional<double> sample_step;  // consumed by sample_on_grid / the CLI

  double effective_warmup() const {
    return warmup < 0.0 ? 0.1 * horizon : warmup;
  }
};

struct SimEvent {
  double time = 0.0;
  State state;  // state after the event
  TransitionKind kind = TransitionKind::CustomerArrival;
};

struct Trajectory {
  State initial{0, 0};
  std::vector<SimEvent> events;
  double final_time = 0.0;
};

struct SimEstimates {
  double mean_total_length = 0.0;
  double se_total_length = 0.0;
  double mean_customer_count = 0.0;
  double se_customer_count = 0.0;
  double mean_server_count = 0.0;
  double se_server_count = 0.0;
  double mean_waiting_customers = 0.0;
  double se_waiting_customers = 0.0;
  // Fraction of (post-warmup) arrivals finding {n >= 1, k <= n}, the set
  // behind the closed-form delay probability.
  double delay_fraction = 0.0;
  double se_delay_fraction = 0.0;
  // Same set plus the empty pre-arrival state (0,0), where the arriving
  // customer also has nobody to serve it.
  double delay_fraction_physical = 0.0;
  double se_delay_fraction_physical = 0.0;
  std::int64_t arrivals_count = 0;
  std::int64_t departures_count = 0;
  double horizon = 0.0;
  double warmup = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Exact-event simulation: exponential holding times at the total exit rate,
// transition picked proportionally. Deterministic for a given (seed, stream).
Trajectory simulate(const ModelParams& params, const SimConfig& cfg,
                    std::uint64_t stream = 0);

// Time-weighted averages over [warmup, horizon] with batch-means standard
// errors (20 equal batches); delay fractions by pre-arrival state inspection.
SimEstimates estimate(const ModelParams& params, const SimConfig& cfg,
                      std::uint64_t stream = 0);

// Independent replications with streams 0..runs-1; order of results is by
// stream regardless of scheduling.
std::vector<SimEstimates> estimate_batch(const ModelParams& params,
                                         const SimConfig& cfg, int runs,
                                         kernels::Exec exec);

struct GridSample {
  double time = 0.0;
  int customers = 0;
  int servers = 0;
  int total = 0;
};

// Piecewise-constant state sampled at t = 0, step, 2 step, ... up to
// final_time inclusive.
std::vector<GridSample> sample_on_grid(const Trajectory& traj, double step);

// Ordinary least-squares slope of values against times.
double least_squares_slope(const std::vector<double>& times,
                           const std::vector<double>& values);

}  // namespace dsq

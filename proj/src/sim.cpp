#include "dsq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dsq {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng Rng::from_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng rng;
  // Mix the stream index in through a second splitmix pass so (seed, 0) and
  // (seed, 1) share no state words.
  std::uint64_t x = seed;
  std::uint64_t salt = stream;
  x ^= splitmix64(salt) + 0x632be59bd9b4e019ULL;
  for (auto& word : rng.s_) word = splitmix64(x);
  return rng;
}

std::uint64_t Rng::next() {
  // xoshiro256++ step.
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
  return -std::log(uniform01()) / rate;
}

namespace {

// Core event loop. Calls on_event(t_event, previous_state, new_state, kind)
// for every event before the horizon; segments of constant state are
// recoverable from consecutive event times.
template <typename OnEvent>
State run_events(const ModelParams& params, const SimConfig& cfg,
                 std::uint64_t stream, OnEvent&& on_event) {
  Rng rng = Rng::from_seed(cfg.seed, stream);
  State state = cfg.initial_state;
  double t = 0.0;
  Transition buf[4];
  for (;;) {
    const int count = enumerate_transitions(params, state, buf);
    double total = 0.0;
    for (int i = 0; i < count; ++i) total += buf[i].rate;
    if (total <= 0.0) break;  // absorbing (lambda_c = 0 and empty system)
    t += rng.exponential(total);
    if (t >= cfg.horizon) break;
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    int chosen = count - 1;
    for (int i = 0; i < count; ++i) {
      acc += buf[i].rate;
      if (u <= acc) {
        chosen = i;
        break;
      }
    }
    const State prev = state;
    state = buf[chosen].to;
    on_event(t, prev, state, buf[chosen].kind);
  }
  return state;
}

}  // namespace

Trajectory simulate(const ModelParams& params, const SimConfig& cfg,
                    std::uint64_t stream) {
  params.validate();
  if (!(cfg.horizon > 0.0)) {
    throw std::invalid_argument("simulate: horizon must be positive");
  }
  if (!is_valid_state(params, cfg.initial_state)) {
    throw std::invalid_argument("simulate: invalid initial state");
  }
  Trajectory traj;
  traj.initial = cfg.initial_state;
  traj.final_time = cfg.horizon;
  run_events(params, cfg, stream,
             [&](double t, State, State next, TransitionKind kind) {
               traj.events.push_back(SimEvent{t, next, kind});
             });
  return traj;
}

namespace {

constexpr int kBatches = 20;

struct BatchAccumulator {
  double begin = 0.0;
  double end = 0.0;
  double batch_len = 0.0;
  // Time integrals per batch for (n + k, n, k, max(n - k, 0)).
  double integ[4][kBatches] = {};
  // Delayed / total arrivals per batch, strict set and physical set.
  double arrivals[kBatches] = {};
  double delayed_strict[kBatches] = {};
  double delayed_physical[kBatches] = {};

  void add_segment(double from, double to, State s) {
    const double lo = std::max(from, begin);
    const double hi = std::min(to, end);
    if (hi <= lo) return;
    const double values[4] = {
        static_cast<double>(s.customers + s.servers),
        static_cast<double>(s.customers),
        static_cast<double>(s.servers),
        static_cast<double>(std::max(s.customers - s.servers, 0)),
    };
    // A segment may straddle batch boundaries.
    int b = static_cast<int>((lo - begin) / batch_len);
    b = std::clamp(b, 0, kBatches - 1);
    double seg_lo = lo;
    while (seg_lo < hi) {
      const double batch_end = begin + (b + 1) * batch_len;
      const double seg_hi = std::min(hi, batch_end);
      for (int q = 0; q < 4; ++q) integ[q][b] += values[q] * (seg_hi - seg_lo);
      seg_lo = seg_hi;
      if (b + 1 < kBatches) {
        ++b;
      } else {
        break;
      }
    }
  }

  int batch_of(double t) const {
    int b = static_cast<int>((t - begin) / batch_len);
    return std::clamp(b, 0, kBatches - 1);
  }
};

void mean_and_se(const double* batch_integrals, double batch_len, double& mean,
                 double& se) {
  double means[kBatches];
  double total = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    means[b] = batch_integrals[b] / batch_len;
    total += means[b];
  }
  mean = total / kBatches;
  double var = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    var += (means[b] - mean) * (means[b] - mean);
  }
  var /= (kBatches - 1);
  se = std::sqrt(var / kBatches);
}

void fraction_and_se(const double* hits, const double* totals, double& frac,
                     double& se) {
  double hit_sum = 0.0;
  double total_sum = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    hit_sum += hits[b];
    total_sum += totals[b];
  }
  frac = total_sum > 0.0 ? hit_sum / total_sum : 0.0;
  double fractions[kBatches];
  int nonempty = 0;
  double mean_frac = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    if (totals[b] > 0.0) {
      fractions[nonempty] = hits[b] / totals[b];
      mean_frac += fractions[nonempty];
      ++nonempty;
    }
  }
  if (nonempty < 2) {
    se = 0.0;
    return;
  }
  mean_frac /= nonempty;
  double var = 0.0;
  for (int i = 0; i < nonempty; ++i) {
    var += (fractions[i] - mean_frac) * (fractions[i] - mean_frac);
  }
  var /= (nonempty - 1);
  se = std::sqrt(var / nonempty);
}

}  // namespace

SimEstimates estimate(const ModelParams& params, const SimConfig& cfg,
                      std::uint64_t stream) {
  params.validate();
  if (!(cfg.horizon > 0.0)) {
    throw std::invalid_argument("estimate: horizon must be positive");
  }
  const double warmup = cfg.effective_warmup();
  if (!(warmup < cfg.horizon)) {
    throw std::invalid_argument("estimate: warmup must be below horizon");
  }
  if (!is_valid_state(params, cfg.initial_state)) {
    throw std::invalid_argument("estimate: invalid initial state");
  }

  BatchAccumulator acc;
  acc.begin = warmup;
  acc.end = cfg.horizon;
  acc.batch_len = (cfg.horizon - warmup) / kBatches;

  SimEstimates est;
  est.horizon = cfg.horizon;
  est.warmup = warmup;
  est.seed = cfg.seed;
  est.stream = stream;

  double segment_start = 0.0;
  const State final_state = run_events(
      params, cfg, stream, [&](double t, State prev, State, TransitionKind kind) {
        acc.add_segment(segment_start, t, prev);
        segment_start = t;
        if (t >= warmup) {
          if (kind == TransitionKind::CustomerArrival) {
            ++est.arrivals_count;
            const int b = acc.batch_of(t);
            acc.arrivals[b] += 1.0;
            const bool strict_delay =
                prev.customers >= 1 && prev.servers <= prev.customers;
            const bool physical_delay =
                strict_delay || (prev.customers == 0 && prev.servers == 0);
            if (strict_delay) acc.delayed_strict[b] += 1.0;
            if (physical_delay) acc.delayed_physical[b] += 1.0;
          } else if (kind == TransitionKind::ServiceCompletion) {
            ++est.departures_count;
          }
        }
      });
  acc.add_segment(segment_start, cfg.horizon, final_state);

  mean_and_se(acc.integ[0], acc.batch_len, est.mean_total_length,
              est.se_total_length);
  mean_and_se(acc.integ[1], acc.batch_len, est.mean_customer_count,
              est.se_customer_count);
  mean_and_se(acc.integ[2], acc.batch_len, est.mean_server_count,
              est.se_server_count);
  mean_and_se(acc.integ[3], acc.batch_len, est.mean_waiting_customers,
              est.se_waiting_customers);
  fraction_and_se(acc.delayed_strict, acc.arrivals, est.delay_fraction,
                  est.se_delay_fraction);
  fraction_and_se(acc.delayed_physical, acc.arrivals,
                  est.delay_fraction_physical, est.se_delay_fraction_physical);
  return est;
}

std::vector<SimEstimates> estimate_batch(const ModelParams& params,
                                         const SimConfig& cfg, int runs,
                                         kernels::Exec exec) {
  if (runs < 1) throw std::invalid_argument("estimate_batch: runs must be >= 1");
  // Fail precondition checks here; exceptions must not cross the parallel
  // region below.
  params.validate();
  if (!(cfg.horizon > 0.0) || !(cfg.effective_warmup() < cfg.horizon) ||
      !is_valid_state(params, cfg.initial_state)) {
    throw std::invalid_argument("estimate_batch: invalid simulation config");
  }
  std::vector<SimEstimates> results(static_cast<std::size_t>(runs));
  if (exec == kernels::Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int run = 0; run < runs; ++run) {
      results[static_cast<std::size_t>(run)] =
          estimate(params, cfg, static_cast<std::uint64_t>(run));
    }
  } else {
    for (int run = 0; run < runs; ++run) {
      results[static_cast<std::size_t>(run)] =
          estimate(params, cfg, static_cast<std::uint64_t>(run));
    }
  }
  return results;
}

std::vector<GridSample> sample_on_grid(const Trajectory& traj, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("sample_on_grid: step must be positive");
  }
  std::vector<GridSample> samples;
  State current = traj.initial;
  std::size_t next_event = 0;
  const double limit = traj.final_time * (1.0 + 1e-12);
  for (long i = 0;; ++i) {
    const double t = static_cast<double>(i) * step;
    if (t > limit) break;
    while (next_event < traj.events.size() &&
           traj.events[next_event].time <= t) {
      current = traj.events[next_event].state;
      ++next_event;
    }
    samples.push_back(GridSample{t, current.customers, current.servers,
                                 current.customers + current.servers});
  }
  return samples;
}

double least_squares_slope(const std::vector<double>& times,
                           const std::vector<double>& values) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("least_squares_slope: need two matched samples");
  }
  const double n = static_cast<double>(times.size());
  double mean_t = 0.0;
  double mean_v = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    mean_t += times[i];
    mean_v += values[i];
  }
  mean_t /= n;
  mean_v /= n;
  double cov = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    cov += (times[i] - mean_t) * (values[i] - mean_v);
    var += (times[i] - mean_t) * (times[i] - mean_t);
  }
  if (var == 0.0) {
    throw std::invalid_argument("least_squares_slope: degenerate time grid");
  }
  return cov / var;
}

}  // namespace dsq

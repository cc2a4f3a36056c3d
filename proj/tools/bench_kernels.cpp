// Benchmark of the OpenMP kernels against their serial reference
// implementations: dense elimination, transposed-CSR matvec, stationary
// power iteration and simulation batches. Results must match bit for bit;
// each section prints both timings and the verified agreement.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dsq/kernels.hpp"
#include "dsq/linalg.hpp"
#include "dsq/model.hpp"
#include "dsq/oracle.hpp"
#include "dsq/sim.hpp"

using namespace dsq;
using kernels::Exec;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const double t0 = now_seconds();
    f();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

void report(const std::string& name, double serial, double parallel, bool match) {
  std::printf("%-38s %10.4f ms %10.4f ms   x%.2f   %s\n", name.c_str(),
              serial * 1e3, parallel * 1e3, serial / parallel,
              match ? "bitwise-equal" : "MISMATCH");
}

void bench_elimination(std::size_t n) {
  Rng rng = Rng::from_seed(5150, n);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.uniform01() - 0.5;
    a(i, i) += static_cast<double>(n);
  }
  Vector b(n);
  for (auto& v : b) v = rng.uniform01();

  Vector xs;
  Vector xp;
  const double ts = best_of(3, [&] { xs = kernels::solve_linear(a, b, Exec::Serial); });
  const double tp = best_of(3, [&] { xp = kernels::solve_linear(a, b, Exec::Parallel); });
  report("dense elimination n=" + std::to_string(n), ts, tp, xs == xp);
}

void bench_oracle_chain(int max_level) {
  // Transposed-CSR kernels on the uniformized Example 1 chain.
  const ModelParams params = ModelParams::simple(1.0, 2.0, 3.0, 4.0);
  const StateSpace space(params.max_servers, max_level);
  const std::size_t n = space.total_states();

  kernels::CsrTransposed pt;
  pt.size = n;
  std::vector<std::vector<std::pair<std::size_t, double>>> incoming(n);
  Vector diag(n, 0.0);
  Transition buf[4];
  for (std::size_t i = 0; i < n; ++i) {
    const State s = space.state_of(i);
    const int count = enumerate_transitions(params, s, buf);
    for (int t = 0; t < count; ++t) {
      if (buf[t].to.customers > max_level) continue;
      incoming[space.index_of(buf[t].to)].emplace_back(i, buf[t].rate);
      diag[i] -= buf[t].rate;
    }
  }
  double uniform_rate = 0.0;
  for (double d : diag) uniform_rate = std::max(uniform_rate, -d);
  uniform_rate *= 1.01;
  pt.row_start.assign(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    pt.row_start[j + 1] = pt.row_start[j] + incoming[j].size() + 1;
  }
  pt.col.resize(pt.row_start[n]);
  pt.val.resize(pt.row_start[n]);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t pos = pt.row_start[j];
    for (const auto& [src, rate] : incoming[j]) {
      pt.col[pos] = src;
      pt.val[pos] = rate / uniform_rate;
      ++pos;
    }
    pt.col[pos] = j;
    pt.val[pos] = 1.0 + diag[j] / uniform_rate;
  }

  Vector x(n, 1.0 / static_cast<double>(n));
  Vector ys(n, 0.0);
  Vector yp(n, 0.0);
  const double ts = best_of(5, [&] {
    for (int rep = 0; rep < 200; ++rep) kernels::gather_matvec(pt, x, ys, Exec::Serial);
  });
  const double tp = best_of(5, [&] {
    for (int rep = 0; rep < 200; ++rep) kernels::gather_matvec(pt, x, yp, Exec::Parallel);
  });
  report("matvec x200, states=" + std::to_string(n), ts, tp, ys == yp);

  kernels::PowerIterationResult rs;
  kernels::PowerIterationResult rp;
  const double ps = best_of(3, [&] {
    rs = kernels::stationary_power_iteration(pt, 1e-12, 100000, Exec::Serial);
  });
  const double pp = best_of(3, [&] {
    rp = kernels::stationary_power_iteration(pt, 1e-12, 100000, Exec::Parallel);
  });
  report("power iteration, states=" + std::to_string(n), ps, pp,
         rs.pi == rp.pi && rs.iterations == rp.iterations);
}

void bench_sim_batch(int runs, double horizon) {
  const ModelParams params = ModelParams::simple(1.0, 2.0, 3.0, 4.0);
  SimConfig cfg;
  cfg.seed = 1;
  cfg.horizon = horizon;
  std::vector<SimEstimates> es;
  std::vector<SimEstimates> ep;
  const double ts = best_of(2, [&] { es = estimate_batch(params, cfg, runs, Exec::Serial); });
  const double tp = best_of(2, [&] { ep = estimate_batch(params, cfg, runs, Exec::Parallel); });
  bool match = es.size() == ep.size();
  for (std::size_t i = 0; match && i < es.size(); ++i) {
    match = es[i].mean_total_length == ep[i].mean_total_length &&
            es[i].arrivals_count == ep[i].arrivals_count;
  }
  report("sim batch, runs=" + std::to_string(runs), ts, tp, match);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; parallel mode falls back to serial\n");
#endif
  std::printf("%-38s %13s %13s %7s\n", "kernel", "serial", "parallel", "speedup");

  bench_elimination(256);
  bench_elimination(512);
  bench_elimination(1024);
  bench_oracle_chain(500);
  bench_oracle_chain(2000);
  bench_sim_batch(8, 50000.0);
  return 0;
}

// Serial cover queue against the level-parallel OpenMP driver on the same problems.

#include "reachguard/verify.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace reachguard;

namespace {

VerificationProblem vanderpol(double delta, double threshold) {
  VerificationProblem p;
  p.system = get_model("vanderpol");
  p.theta_center = p.system.default_center;
  p.delta = delta;
  p.T = 5.0;
  p.tau = 0.02;
  p.epsilon0 = 1e-5;
  p.unsafe = HalfspaceSet::coordinate_above(2, 0, threshold);
  return p;
}

void report(benchmark::State& st, const Verdict& v) {
  st.counters["sims"] = v.num_sims;
  st.counters["sims/s"] = benchmark::Counter(v.num_sims, benchmark::Counter::kIsRate);
  if (v.status != Status::kSafe) st.SkipWithError("verdict is not SAFE");
}

void BM_Serial(benchmark::State& st) {
  const auto p = vanderpol(0.2 * 0.5 * static_cast<double>(st.range(0)), 2.0);
  Verdict v;
  for (auto _ : st) v = verify_safety_serial(p);
  report(st, v);
}

void BM_Parallel(benchmark::State& st) {
  auto p = vanderpol(0.2 * 0.5 * static_cast<double>(st.range(0)), 2.0);
  p.workers = static_cast<int>(st.range(1));
  Verdict v;
  for (auto _ : st) v = verify_safety(p);
  report(st, v);
}

void thread_args(benchmark::internal::Benchmark* b) {
  const int max = omp_get_num_procs();
  for (int delta2 : {2, 4})  // delta = 0.2, 0.4
    for (int w = 1; w <= max; w *= 2) b->Args({delta2, w});
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Parallel)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

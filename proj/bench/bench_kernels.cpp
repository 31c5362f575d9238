// Serial reference path vs streaming engine vs OpenMP replicate batches.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "spdeloc/montecarlo.hpp"

using namespace spdeloc;

namespace {

McSetup transport(double theta2) {
  McSetup s;
  Vec b(1);
  b << 1.0;
  s.spec = OperatorSpec::transport_example(1, 0.2, b);
  s.theta = Vec(2);
  s.theta << 1.0, theta2;
  s.kernel = std::make_shared<const Kernel>(Kernel::bump(1));
  s.delta = 1.0 / 32;
  s.M = 8;
  s.T = 0.05;
  s.modes_per_inverse_delta = 4.0;
  s.dt_divisor = 5.0;
  s.init = InitialMode::Stationary;
  return s;
}

const McProblem& problem(int dense) {
  static const McProblem diag(transport(0.0));
  static const McProblem drift(transport(0.5));
  return dense ? drift : diag;
}

void BM_Reference(benchmark::State& state) {
  const McProblem& p = problem(state.range(0));
  uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(p.reference(1, r++));
  state.SetLabel(p.engine());
}

void BM_Streaming(benchmark::State& state) {
  const McProblem& p = problem(state.range(0));
  uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(p.run(1, r++));
  state.SetLabel(p.engine());
}

// 16 replicates per iteration on range(1) threads.
void BM_RunMany(benchmark::State& state) {
  const McProblem& p = problem(state.range(0));
  const int threads = static_cast<int>(state.range(1));
  std::vector<SufficientStatistics> out;
  uint64_t r = 0;
  for (auto _ : state) {
    p.run_many(1, r, 16, out, threads);
    r += 16;
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 16);
  state.SetLabel(p.engine() + " threads=" + std::to_string(threads));
}

void thread_args(benchmark::internal::Benchmark* b) {
  const int maxt = omp_get_max_threads();
  for (int dense : {0, 1}) {
    b->Args({dense, 1});
    if (maxt > 1) b->Args({dense, maxt});
  }
}

}  // namespace

BENCHMARK(BM_Reference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Streaming)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunMany)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

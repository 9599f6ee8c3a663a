#include <benchmark/benchmark.h>

#include "lognn/baselines.hpp"
#include "lognn/rng.hpp"

using namespace lognn;

static void BM_TotalDelay(benchmark::State& state) {
  const int m = int(state.range(0));
  const McInstance inst = generate_instance(2 * m, m, 7);
  const Allocation alloc = random_allocation(inst, 3);
  for (auto _ : state) {
    double d = total_delay(inst, alloc);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_TotalDelay)->Arg(2)->Arg(10)->Arg(30);

static void BM_ProjectToFeasible(benchmark::State& state) {
  const int m = int(state.range(0));
  const int n = 2 * m;
  const McInstance inst = generate_instance(n, m, 7);
  Rng rng(11);
  Mat x(n, m), p(n, m), f(n, m);
  for (double& v : x.v) v = rng.normal();
  for (double& v : p.v) v = rng.normal();
  for (double& v : f.v) v = rng.normal();
  std::vector<double> s(n, 0.3);
  for (auto _ : state) {
    Allocation alloc = project_to_feasible(x, p, f, s, inst);
    benchmark::DoNotOptimize(alloc.compute.data());
  }
}
BENCHMARK(BM_ProjectToFeasible)->Arg(2)->Arg(10)->Arg(30);

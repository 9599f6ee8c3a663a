#include <benchmark/benchmark.h>

#include "lognn/baselines.hpp"
#include "lognn/rng.hpp"

using namespace lognn;

static void BM_GaGeneration(benchmark::State& state) {
  const int m = int(state.range(0));
  const McInstance inst = generate_instance(2 * m, m, 13);
  GaConfig config;
  config.generations = 1;
  config.seed = 2;
  for (auto _ : state) {
    GaResult result = ga_solve(inst, config);
    benchmark::DoNotOptimize(result.best_delay);
  }
  state.SetLabel("one generation, population 200");
}
BENCHMARK(BM_GaGeneration)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_ChromosomeDecodeEval(benchmark::State& state) {
  const int m = int(state.range(0));
  const McInstance inst = generate_instance(2 * m, m, 13);
  Rng rng(4);
  std::vector<double> genes(chromosome_length(inst));
  for (double& g : genes) g = rng.normal();
  for (auto _ : state) {
    double d = total_delay(inst, decode_chromosome(genes, inst));
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_ChromosomeDecodeEval)->Arg(2)->Arg(10)->Arg(30);

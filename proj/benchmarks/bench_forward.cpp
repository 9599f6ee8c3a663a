#include <benchmark/benchmark.h>

#include "lognn/model.hpp"
#include "lognn/train.hpp"

using namespace lognn;

static void BM_LognnInference(benchmark::State& state) {
  const int m = int(state.range(0));
  const LognnModel model = init_model(1);
  const McInstance inst = generate_instance(2 * m, m, 42);
  for (auto _ : state) {
    Allocation alloc = lognn_allocate(model, inst);
    benchmark::DoNotOptimize(alloc.offload.data());
  }
}
BENCHMARK(BM_LognnInference)->Arg(2)->Arg(4)->Arg(10)->Arg(30);

static void BM_LognnForwardBackward(benchmark::State& state) {
  const int m = int(state.range(0));
  LognnModel model = init_model(1);
  const McInstance inst = generate_instance(2 * m, m, 42);
  const ProblemGraph graph = encode_graph(inst);
  std::vector<Mat*> params = model.parameters();
  for (auto _ : state) {
    Tape tape;
    auto watched = watch_parameters(params, &tape);
    Tensor obj = objective_op(inst, lognn_forward(model, watched, graph));
    tape.backward(obj);
    benchmark::DoNotOptimize(tape.grad(watched[0]).data());
  }
}
BENCHMARK(BM_LognnForwardBackward)->Arg(2)->Arg(4)->Arg(10);

static void BM_UnsupervisedEpoch(benchmark::State& state) {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  cfg.n_train_samples = 8;
  cfg.held_out_samples = 1;
  cfg.seed = 5;
  cfg.size_distribution = {{int(state.range(0)) * 2, int(state.range(0))}};
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});
  for (auto _ : state) {
    LognnModel model = init_model(1);
    TrainLog log = train_unsupervised(model, data, cfg);
    benchmark::DoNotOptimize(log.epochs.back().train_objective);
  }
}
BENCHMARK(BM_UnsupervisedEpoch)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

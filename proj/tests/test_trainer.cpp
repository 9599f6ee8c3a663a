#include <doctest.h>

#include <cmath>

#include "lognn/train.hpp"

using namespace lognn;

namespace {

TrainConfig tiny_config(TrainMethod method, uint64_t seed) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.n_train_samples = 8;
  cfg.lr = 1e-3;
  cfg.seed = seed;
  cfg.size_distribution = {{4, 2}};
  cfg.held_out_samples = 8;
  cfg.ga_label_generations = 3;
  return cfg;
}

std::vector<double> objective_curve(const TrainLog& log) {
  std::vector<double> curve;
  for (const EpochRecord& r : log.epochs) curve.push_back(r.train_objective);
  return curve;
}

}  // namespace

TEST_CASE("config invariants reject bad values") {
  TrainConfig cfg = tiny_config(TrainMethod::kUnsupervised, 1);
  cfg.batch_size = 100;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_config(TrainMethod::kSupervised, 1);
  cfg.ga_label_generations = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_config(TrainMethod::kUnsupervised, 1);
  cfg.size_distribution.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("dataset generation is size-mixed and deterministic") {
  const auto sizes = TrainConfig::default_size_distribution();
  const auto a = make_dataset(32, sizes, 5, {});
  const auto b = make_dataset(32, sizes, 5, {});
  REQUIRE(a.size() == 32);
  bool mixed = false;
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].n_users == 2 * a[k].n_servers);
    CHECK(a[k].channel_gain.v == b[k].channel_gain.v);
    if (a[k].n_servers != a[0].n_servers) mixed = true;
  }
  CHECK(mixed);
}

TEST_CASE("zero learning rate leaves the model untouched") {
  LognnModel model = init_model(2, 8, 2);
  const Mat before = model.readout_user;
  TrainConfig cfg = tiny_config(TrainMethod::kUnsupervised, 3);
  cfg.epochs = 1;
  cfg.lr = 0.0;
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});
  const TrainLog log = train_unsupervised(model, data, cfg);
  CHECK_FALSE(log.aborted());
  CHECK(model.readout_user.v == before.v);
}

TEST_CASE("identical seeds reproduce the whole objective sequence") {
  TrainConfig cfg = tiny_config(TrainMethod::kUnsupervised, 17);
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});
  LognnModel m1 = init_model(cfg.seed, 8, 2);
  LognnModel m2 = init_model(cfg.seed, 8, 2);
  const TrainLog l1 = train_unsupervised(m1, data, cfg);
  const TrainLog l2 = train_unsupervised(m2, data, cfg);
  CHECK(objective_curve(l1) == objective_curve(l2));
  CHECK(m1.readout_user.v == m2.readout_user.v);
}

TEST_CASE("unsupervised training reduces the objective on a small problem") {
  TrainConfig cfg = tiny_config(TrainMethod::kUnsupervised, 23);
  cfg.epochs = 40;
  cfg.n_train_samples = 16;
  cfg.batch_size = 8;
  cfg.lr = 3e-3;
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});
  LognnModel model = init_model(cfg.seed, 16, 2);
  const TrainLog log = train_unsupervised(model, data, cfg);
  REQUIRE(log.epochs.size() == 40);
  CHECK(log.epochs.back().train_objective < log.epochs.front().train_objective);
  CHECK(log.epochs.back().test_objective < log.epochs.front().test_objective);
}

TEST_CASE("mse against the model's own output has zero gradient") {
  LognnModel model = init_model(4, 8, 2);
  const McInstance inst = generate_instance(4, 2, 9);

  Tape tape;
  std::vector<Mat*> params = model.parameters();
  std::vector<Tensor> watched = watch_parameters(params, &tape);
  AllocTensors alloc = project_to_feasible_op(
      lognn_forward(model, watched, encode_graph(inst)), inst);
  const Allocation self_label = to_allocation(alloc);

  Tensor dx = sub(alloc.offload, Tensor::constant(self_label.offload));
  Tensor dp = sub(alloc.power, Tensor::constant(self_label.power));
  Tensor df = sub(alloc.compute, Tensor::constant(self_label.compute));
  Tensor loss = add(add(sum(mul(dx, dx)), sum(mul(dp, dp))), sum(mul(df, df)));
  CHECK(loss.scalar() == 0.0);
  tape.backward(loss);
  for (const Tensor& w : watched) {
    const Mat g = tape.grad(w);
    for (double v : g.v) CHECK(v == 0.0);
  }
}

TEST_CASE("supervised training runs and logs every epoch") {
  TrainConfig cfg = tiny_config(TrainMethod::kSupervised, 29);
  LognnModel model = init_model(cfg.seed, 8, 2);
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});
  const TrainLog log = train_supervised(model, data, cfg);
  CHECK_FALSE(log.aborted());
  CHECK(log.epochs.size() == 3);
  CHECK(log.skipped_labels == 0);
  for (const EpochRecord& r : log.epochs) CHECK(r.seconds > 0.0);
}

TEST_CASE("actor-critic trains, and the critic fits below target variance") {
  TrainConfig cfg = tiny_config(TrainMethod::kActorCritic, 31);
  cfg.epochs = 25;
  cfg.n_train_samples = 16;
  cfg.batch_size = 8;
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});

  // Variance of the delay targets the critic regresses onto.
  LognnModel probe = init_model(cfg.seed, 8, 2);
  std::vector<double> delays;
  for (const McInstance& inst : data)
    delays.push_back(total_delay(inst, lognn_allocate(probe, inst)));
  double mean = 0.0, var = 0.0;
  for (double d : delays) mean += d;
  mean /= double(delays.size());
  for (double d : delays) var += (d - mean) * (d - mean);
  var /= double(delays.size());

  LognnModel actor = init_model(cfg.seed, 8, 2);
  const TrainLog log = train_actor_critic(actor, data, cfg);
  CHECK_FALSE(log.aborted());
  REQUIRE(log.epochs.size() == 25);
  CHECK(log.epochs.back().critic_mse < var);
}

TEST_CASE("actor-critic rejects mixed instance sizes") {
  TrainConfig cfg = tiny_config(TrainMethod::kActorCritic, 37);
  std::vector<McInstance> mixed = {generate_instance(4, 2, 1), generate_instance(6, 3, 2)};
  LognnModel actor = init_model(1, 8, 2);
  CHECK_THROWS_AS(train_actor_critic(actor, mixed, cfg), std::invalid_argument);
}

TEST_CASE("trainers work with the mlp backbone too") {
  TrainConfig cfg = tiny_config(TrainMethod::kUnsupervised, 41);
  MlpModel model = init_mlp(cfg.seed, 4, 2, 16, 3);
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});
  const TrainLog log = train_unsupervised(model, data, cfg);
  CHECK_FALSE(log.aborted());
  CHECK(log.epochs.size() == 3);
}

TEST_CASE("trained mlp at its own size beats the off-size direct-inference mlp") {
  // MLP(TR) trained briefly at (8,4) vs an untrained-size MLP carried over
  // from (4,2) in direct-inference mode.
  TrainConfig cfg = tiny_config(TrainMethod::kUnsupervised, 43);
  cfg.size_distribution = {{8, 4}};
  cfg.epochs = 30;
  cfg.n_train_samples = 32;
  cfg.batch_size = 8;
  cfg.lr = 3e-3;
  const auto data = make_dataset(cfg.n_train_samples, cfg.size_distribution, cfg.seed, {});
  MlpModel trained = init_mlp(cfg.seed, 8, 4);
  train_unsupervised(trained, data, cfg);

  const MlpModel off_size = init_mlp(cfg.seed, 4, 2);
  double tr_delay = 0.0, di_delay = 0.0;
  for (uint64_t k = 0; k < 16; ++k) {
    const McInstance inst = generate_instance(8, 4, 700 + k);
    tr_delay += total_delay(inst, mlp_forward(trained, inst, MlpMode::kExact));
    di_delay += total_delay(inst, mlp_forward(off_size, inst, MlpMode::kDirectInference));
  }
  CHECK(tr_delay < di_delay);
}

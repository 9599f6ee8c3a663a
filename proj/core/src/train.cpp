#include "lognn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lognn/errors.hpp"
#include "lognn/graph.hpp"
#include "lognn/rng.hpp"

namespace lognn {

namespace {

constexpr uint64_t kSizeStreamSalt = 0x51ec;
constexpr uint64_t kHeldOutSalt = 0x4e1d;
constexpr uint64_t kShuffleSalt = 0x5f1e;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

ModelLogits forward_logits(const LognnModel& model, const std::vector<Tensor>& params,
                           const McInstance& inst) {
  return lognn_forward(model, params, encode_graph(inst));
}

ModelLogits forward_logits(const MlpModel& model, const std::vector<Tensor>& params,
                           const McInstance& inst) {
  return mlp_forward_logits(model, params, inst);
}

// Deterministic per-epoch visit order.
std::vector<int> epoch_order(int count, uint64_t seed, int epoch) {
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::mix(seed, kShuffleSalt + uint64_t(epoch)));
  for (int i = count - 1; i >= 1; --i) {
    const int j = int(rng.below(uint64_t(i) + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

template <class ModelT>
double mean_delay_impl(const ModelT& model, const std::vector<McInstance>& instances) {
  double total = 0.0;
  for (const McInstance& inst : instances) {
    auto params = watch_parameters(const_cast<ModelT&>(model).parameters(), nullptr);
    ModelLogits logits = forward_logits(model, params, inst);
    Allocation alloc = to_allocation(project_to_feasible_op(logits, inst));
    total += total_delay(inst, alloc);
  }
  return total / double(instances.size());
}

}  // namespace

std::string to_string(TrainMethod method) {
  switch (method) {
    case TrainMethod::kUnsupervised: return "unsupervised";
    case TrainMethod::kSupervised: return "supervised";
    case TrainMethod::kActorCritic: return "actor_critic";
  }
  return "unknown";
}

TrainMethod train_method_from_string(const std::string& name) {
  if (name == "unsupervised") return TrainMethod::kUnsupervised;
  if (name == "supervised") return TrainMethod::kSupervised;
  if (name == "actor_critic") return TrainMethod::kActorCritic;
  throw std::invalid_argument("unknown training method: " + name);
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || n_train_samples < 1)
    throw std::invalid_argument("TrainConfig: epochs, batch_size, n_train_samples must be >= 1");
  if (batch_size > n_train_samples)
    throw std::invalid_argument("TrainConfig: batch_size must be <= n_train_samples");
  if (lr < 0.0) throw std::invalid_argument("TrainConfig: lr must be >= 0");
  if (size_distribution.empty())
    throw std::invalid_argument("TrainConfig: size_distribution must be non-empty");
  for (auto [n, m] : size_distribution)
    if (n < 1 || m < 1) throw std::invalid_argument("TrainConfig: sizes must be >= 1");
  if (held_out_samples < 1)
    throw std::invalid_argument("TrainConfig: held_out_samples must be >= 1");
  if (method == TrainMethod::kSupervised && ga_label_generations < 1)
    throw std::invalid_argument("TrainConfig: supervised training needs a GA label budget >= 1");
}

std::vector<std::pair<int, int>> TrainConfig::default_size_distribution() {
  std::vector<std::pair<int, int>> sizes;
  for (int m = 2; m <= 10; ++m) sizes.emplace_back(2 * m, m);
  return sizes;
}

std::vector<McInstance> make_dataset(int count, const std::vector<std::pair<int, int>>& sizes,
                                     uint64_t seed, const PhysicalConstants& constants) {
  if (count < 1) throw std::invalid_argument("make_dataset: count must be >= 1");
  if (sizes.empty()) throw std::invalid_argument("make_dataset: empty size distribution");
  Rng size_rng(Rng::mix(seed, kSizeStreamSalt));
  std::vector<McInstance> data;
  data.reserve(count);
  for (int k = 0; k < count; ++k) {
    const auto [n, m] = sizes[size_rng.below(sizes.size())];
    data.push_back(generate_instance(n, m, Rng::mix(seed, uint64_t(k) + 1), constants));
  }
  return data;
}

std::vector<McInstance> make_held_out(const TrainConfig& config) {
  // Stratified: equal instance counts per evaluation size. Mean delays are
  // heavy-tailed, so letting the size mix float would swamp the held-out
  // curve with composition noise.
  const uint64_t seed = Rng::mix(config.seed, kHeldOutSalt);
  std::vector<McInstance> data;
  data.reserve(config.held_out_samples);
  const auto& sizes = config.size_distribution;
  for (int k = 0; k < config.held_out_samples; ++k) {
    const auto [n, m] = sizes[size_t(k) % sizes.size()];
    data.push_back(generate_instance(n, m, Rng::mix(seed, uint64_t(k) + 1), config.constants));
  }
  return data;
}

double evaluate_mean_delay(const LognnModel& model, const std::vector<McInstance>& instances) {
  return mean_delay_impl(model, instances);
}
double evaluate_mean_delay(const MlpModel& model, const std::vector<McInstance>& instances) {
  return mean_delay_impl(model, instances);
}

template <class ModelT>
TrainLog train_unsupervised(ModelT& model, const std::vector<McInstance>& train,
                            const TrainConfig& config) {
  config.validate();
  const std::vector<McInstance> held_out = make_held_out(config);
  std::vector<Mat*> params = model.parameters();
  AdamState adam = AdamState::init(params, config.lr);

  TrainLog log;
  log.method = TrainMethod::kUnsupervised;
  log.seed = config.seed;
  const int count = int(train.size());

  try {
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      const double t0 = now_seconds();
      const std::vector<int> order = epoch_order(count, config.seed, epoch);
      double epoch_obj = 0.0;

      for (int lo = 0; lo < count; lo += config.batch_size) {
        const int hi = std::min(lo + config.batch_size, count);
        Tape tape;
        std::vector<Tensor> watched = watch_parameters(params, &tape);
        Tensor batch_sum;
        for (int k = lo; k < hi; ++k) {
          const McInstance& inst = train[order[k]];
          Tensor obj = objective_op(inst, forward_logits(model, watched, inst));
          epoch_obj += obj.scalar();
          batch_sum = (k == lo) ? obj : add(batch_sum, obj);
        }
        Tensor loss = scale(batch_sum, 1.0 / double(hi - lo));
        if (!std::isfinite(loss.scalar()))
          throw NumericError("unsupervised: non-finite loss at epoch " + std::to_string(epoch) +
                             " batch " + std::to_string(lo / config.batch_size));
        tape.backward(loss);
        std::vector<Mat> grads;
        grads.reserve(watched.size());
        for (const Tensor& w : watched) grads.push_back(tape.grad(w));
        adam_step(adam, params, grads);
      }

      EpochRecord rec;
      rec.seconds = now_seconds() - t0;
      rec.train_objective = epoch_obj / double(count);
      rec.test_objective = evaluate_mean_delay(model, held_out);
      log.epochs.push_back(rec);
    }
  } catch (const NumericError& e) {
    log.aborted_reason = e.what();
  }
  return log;
}

template <class ModelT>
TrainLog train_supervised(ModelT& model, const std::vector<McInstance>& train,
                          const TrainConfig& config) {
  config.validate();
  const std::vector<McInstance> held_out = make_held_out(config);
  std::vector<Mat*> params = model.parameters();
  AdamState adam = AdamState::init(params, config.lr);

  TrainLog log;
  log.method = TrainMethod::kSupervised;
  log.seed = config.seed;
  const int count = int(train.size());

  try {
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      const double t0 = now_seconds();
      const std::vector<int> order = epoch_order(count, config.seed, epoch);
      double epoch_obj = 0.0;
      int epoch_evaluated = 0;

      for (int lo = 0; lo < count; lo += config.batch_size) {
        const int hi = std::min(lo + config.batch_size, count);

        // GA labels for this batch. Generation latency is deliberately part
        // of the epoch wall-clock.
        std::vector<const McInstance*> batch;
        std::vector<Allocation> labels;
        for (int k = lo; k < hi; ++k) {
          const McInstance& inst = train[order[k]];
          GaConfig ga;
          ga.generations = config.ga_label_generations;
          ga.seed = Rng::mix(config.seed, uint64_t(epoch) * 131071 + uint64_t(order[k]));
          try {
            labels.push_back(ga_solve(inst, ga).allocation);
            batch.push_back(&inst);
          } catch (const std::exception&) {
            log.skipped_labels += 1;
          }
        }
        if (batch.empty()) continue;

        Tape tape;
        std::vector<Tensor> watched = watch_parameters(params, &tape);
        Tensor batch_sum;
        for (size_t k = 0; k < batch.size(); ++k) {
          const McInstance& inst = *batch[k];
          AllocTensors alloc = project_to_feasible_op(forward_logits(model, watched, inst), inst);
          epoch_obj += total_delay(inst, to_allocation(alloc));
          epoch_evaluated += 1;

          Tensor dx = sub(alloc.offload, Tensor::constant(labels[k].offload));
          Tensor dp = sub(alloc.power, Tensor::constant(labels[k].power));
          Tensor df = sub(alloc.compute, Tensor::constant(labels[k].compute));
          Tensor se = add(add(sum(mul(dx, dx)), sum(mul(dp, dp))), sum(mul(df, df)));
          Tensor mse = scale(se, 1.0 / double(3 * inst.n_users * inst.n_servers));
          batch_sum = (k == 0) ? mse : add(batch_sum, mse);
        }
        Tensor loss = scale(batch_sum, 1.0 / double(batch.size()));
        if (!std::isfinite(loss.scalar()))
          throw NumericError("supervised: non-finite loss at epoch " + std::to_string(epoch) +
                             " batch " + std::to_string(lo / config.batch_size));
        tape.backward(loss);
        std::vector<Mat> grads;
        grads.reserve(watched.size());
        for (const Tensor& w : watched) grads.push_back(tape.grad(w));
        adam_step(adam, params, grads);
      }

      EpochRecord rec;
      rec.seconds = now_seconds() - t0;
      rec.train_objective = epoch_evaluated > 0 ? epoch_obj / double(epoch_evaluated) : 0.0;
      rec.test_objective = evaluate_mean_delay(model, held_out);
      log.epochs.push_back(rec);
    }
  } catch (const NumericError& e) {
    log.aborted_reason = e.what();
  }
  return log;
}

namespace {

// The actor-critic value net: flattened (instance, allocation) -> delay.
// The net regresses in standardized units; the fixed affine output maps back
// to delay scale so gradients stay well-conditioned even when delays span
// orders of magnitude.
struct CriticNet {
  std::vector<Mat> weights;
  std::vector<Mat> biases;
  double out_mean = 0.0;
  double out_scale = 1.0;

  std::vector<Mat*> parameters() {
    std::vector<Mat*> out;
    for (size_t l = 0; l < weights.size(); ++l) {
      out.push_back(&weights[l]);
      out.push_back(&biases[l]);
    }
    return out;
  }
};

CriticNet init_critic(uint64_t seed, int input_dim, int hidden_dim, int n_layers) {
  Rng rng(seed);
  CriticNet net;
  int in = input_dim;
  for (int l = 0; l < n_layers; ++l) {
    const int out = (l == n_layers - 1) ? 1 : hidden_dim;
    const double bound = std::sqrt(6.0 / double(in + out));
    Mat w(in, out);
    for (double& v : w.v) v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Mat(1, out));
    in = out;
  }
  return net;
}

Tensor critic_forward(const CriticNet& net, const std::vector<Tensor>& params,
                      const Tensor& input) {
  Tensor h = input;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    h = add_rowvec(matmul(h, params[2 * l]), params[2 * l + 1]);
    if (l + 1 < net.weights.size()) h = leaky_relu(h);
  }
  return add_scalar(scale(h, net.out_scale), net.out_mean);
}

Mat instance_features_row(const McInstance& inst) {
  const int n = inst.n_users, m = inst.n_servers;
  Mat row(1, n * m + n + m);
  int c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) row(0, c++) = inst.channel_gain(i, j);
  for (int i = 0; i < n; ++i) row(0, c++) = inst.task_size[i];
  for (int j = 0; j < m; ++j) row(0, c++) = inst.server_compute[j];
  return row;
}

Tensor flatten_alloc_row(const AllocTensors& alloc, int nm) {
  Tensor x = reshape(alloc.offload, 1, nm);
  Tensor p = reshape(alloc.power, 1, nm);
  Tensor f = reshape(alloc.compute, 1, nm);
  return concat_cols(concat_cols(x, p), f);
}

}  // namespace

template <class ModelT>
TrainLog train_actor_critic(ModelT& actor, const std::vector<McInstance>& train,
                            const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("train_actor_critic: empty dataset");
  const int n = train.front().n_users, m = train.front().n_servers;
  for (const McInstance& inst : train)
    if (inst.n_users != n || inst.n_servers != m)
      throw std::invalid_argument("train_actor_critic: requires a fixed instance size");

  const std::vector<McInstance> held_out = make_held_out(config);
  std::vector<Mat*> actor_params = actor.parameters();
  AdamState actor_adam = AdamState::init(actor_params, config.lr);

  const int inst_dim = n * m + n + m;
  const int critic_in = inst_dim + 3 * n * m;
  CriticNet critic = init_critic(Rng::mix(config.seed, 0xc417), critic_in, 64, 4);

  // Calibrate the critic's output affine on the initial actor's delays.
  {
    double mean = 0.0, sq = 0.0;
    for (const McInstance& inst : train) {
      auto aw = watch_parameters(actor_params, nullptr);
      const double d = total_delay(
          inst, to_allocation(project_to_feasible_op(forward_logits(actor, aw, inst), inst)));
      mean += d;
      sq += d * d;
    }
    mean /= double(train.size());
    const double var = std::max(sq / double(train.size()) - mean * mean, 0.0);
    critic.out_mean = mean;
    critic.out_scale = std::max(std::sqrt(var), 1.0);
  }

  std::vector<Mat*> critic_params = critic.parameters();
  AdamState critic_adam = AdamState::init(critic_params, config.lr);

  TrainLog log;
  log.method = TrainMethod::kActorCritic;
  log.seed = config.seed;
  const int count = int(train.size());

  try {
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double t0 = now_seconds();
    const std::vector<int> order = epoch_order(count, config.seed, epoch);
    double epoch_obj = 0.0;
    double epoch_critic_mse = 0.0;
    int n_batches = 0;

    for (int lo = 0; lo < count; lo += config.batch_size) {
      const int hi = std::min(lo + config.batch_size, count);
      const int bn = hi - lo;
      n_batches += 1;

      // Critic step: regress predicted delay onto the true delay of the
      // current actor's allocations.
      {
        Tape tape;
        std::vector<Tensor> cw = watch_parameters(critic_params, &tape);
        Tensor batch_sum;
        for (int k = lo; k < hi; ++k) {
          const McInstance& inst = train[order[k]];
          auto aw = watch_parameters(actor_params, nullptr);
          AllocTensors alloc =
              project_to_feasible_op(forward_logits(actor, aw, inst), inst);
          const double true_delay = total_delay(inst, to_allocation(alloc));
          epoch_obj += true_delay;

          Mat input_row(1, critic_in);
          const Mat inst_row = instance_features_row(inst);
          std::copy(inst_row.v.begin(), inst_row.v.end(), input_row.v.begin());
          const Mat flat = flatten_alloc_row(alloc, n * m).value();
          std::copy(flat.v.begin(), flat.v.end(), input_row.v.begin() + inst_dim);

          Tensor pred = critic_forward(critic, cw, Tensor::constant(std::move(input_row)));
          Tensor err = add_scalar(pred, -true_delay);
          Tensor se = mul(err, err);
          batch_sum = (k == lo) ? se : add(batch_sum, se);
        }
        Tensor loss = scale(batch_sum, 1.0 / double(bn));
        if (!std::isfinite(loss.scalar()))
          throw NumericError("actor_critic: non-finite critic loss at epoch " +
                             std::to_string(epoch));
        epoch_critic_mse += loss.scalar();
        tape.backward(loss);
        std::vector<Mat> grads;
        for (const Tensor& w : cw) grads.push_back(tape.grad(w));
        adam_step(critic_adam, critic_params, grads);
      }

      // Actor step: descend the critic's predicted delay; critic parameters
      // enter as constants so only the actor moves.
      {
        Tape tape;
        std::vector<Tensor> aw = watch_parameters(actor_params, &tape);
        std::vector<Tensor> cw = watch_parameters(critic_params, nullptr);
        Tensor batch_sum;
        for (int k = lo; k < hi; ++k) {
          const McInstance& inst = train[order[k]];
          AllocTensors alloc =
              project_to_feasible_op(forward_logits(actor, aw, inst), inst);
          Tensor input =
              concat_cols(Tensor::constant(instance_features_row(inst)),
                          flatten_alloc_row(alloc, n * m));
          Tensor pred = critic_forward(critic, cw, input);
          batch_sum = (k == lo) ? pred : add(batch_sum, pred);
        }
        Tensor loss = scale(batch_sum, 1.0 / double(bn));
        if (!std::isfinite(loss.scalar()))
          throw NumericError("actor_critic: non-finite actor loss at epoch " +
                             std::to_string(epoch));
        tape.backward(loss);
        std::vector<Mat> grads;
        for (const Tensor& w : aw) grads.push_back(tape.grad(w));
        adam_step(actor_adam, actor_params, grads);
      }
    }

    EpochRecord rec;
    rec.seconds = now_seconds() - t0;
    rec.train_objective = epoch_obj / double(count);
    rec.test_objective = evaluate_mean_delay(actor, held_out);
    rec.critic_mse = epoch_critic_mse / double(n_batches);
    log.epochs.push_back(rec);
  }
  } catch (const NumericError& e) {
    log.aborted_reason = e.what();
  }
  return log;
}

template TrainLog train_unsupervised<LognnModel>(LognnModel&, const std::vector<McInstance>&,
                                                 const TrainConfig&);
template TrainLog train_unsupervised<MlpModel>(MlpModel&, const std::vector<McInstance>&,
                                               const TrainConfig&);
template TrainLog train_supervised<LognnModel>(LognnModel&, const std::vector<McInstance>&,
                                               const TrainConfig&);
template TrainLog train_supervised<MlpModel>(MlpModel&, const std::vector<McInstance>&,
                                             const TrainConfig&);
template TrainLog train_actor_critic<LognnModel>(LognnModel&, const std::vector<McInstance>&,
                                                 const TrainConfig&);
template TrainLog train_actor_critic<MlpModel>(MlpModel&, const std::vector<McInstance>&,
                                               const TrainConfig&);

}  // namespace lognn

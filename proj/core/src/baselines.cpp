#include "lognn/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lognn/rng.hpp"

namespace lognn {

namespace {

Mat glorot(Rng& rng, int rows, int cols) {
  const double bound = std::sqrt(6.0 / double(rows + cols));
  Mat m(rows, cols);
  for (double& v : m.v) v = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

void GaConfig::validate() const {
  auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!in_unit(retain_rate) || !in_unit(mutation_rate) || !in_unit(selection_rate))
    throw std::invalid_argument("GaConfig: rates must lie in [0, 1]");
  if (retain_rate + selection_rate > 1.0)
    throw std::invalid_argument("GaConfig: retain_rate + selection_rate must be <= 1");
  if (population < 2) throw std::invalid_argument("GaConfig: population must be >= 2");
  if (generations < 0) throw std::invalid_argument("GaConfig: generations must be >= 0");
  if (mutation_sigma <= 0.0) throw std::invalid_argument("GaConfig: mutation_sigma must be > 0");
}

int chromosome_length(const McInstance& inst) {
  return 3 * inst.n_users * inst.n_servers + inst.n_users;
}

Allocation decode_chromosome(const std::vector<double>& genes, const McInstance& inst) {
  const int n = inst.n_users, m = inst.n_servers, nm = n * m;
  if (int(genes.size()) != chromosome_length(inst))
    throw std::invalid_argument("decode_chromosome: gene count does not match instance");
  Mat x_logits(n, m), p_logits(n, m), f_logits(n, m);
  std::copy_n(genes.data(), nm, x_logits.data());
  std::copy_n(genes.data() + nm, nm, p_logits.data());
  std::copy_n(genes.data() + 2 * nm, nm, f_logits.data());
  std::vector<double> scale(genes.begin() + 3 * nm, genes.end());
  return project_to_feasible(x_logits, p_logits, f_logits, scale, inst);
}

GaResult ga_solve(const McInstance& inst, const GaConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  Rng rng(config.seed);
  const int genes = chromosome_length(inst);
  const int pop = config.population;

  std::vector<std::vector<double>> population(pop, std::vector<double>(genes));
  for (auto& chrom : population)
    for (double& g : chrom) g = rng.normal();

  auto fitness_of = [&](const std::vector<double>& chrom) {
    return -total_delay(inst, decode_chromosome(chrom, inst));
  };

  std::vector<double> fitness(pop);
  for (int k = 0; k < pop; ++k) fitness[k] = fitness_of(population[k]);

  std::vector<double> best_chrom;
  double best_fitness = -std::numeric_limits<double>::infinity();
  auto track_best = [&](int k) {
    if (fitness[k] > best_fitness) {
      best_fitness = fitness[k];
      best_chrom = population[k];
    }
  };
  for (int k = 0; k < pop; ++k) track_best(k);
  GaResult result;
  result.best_delay_history.push_back(-best_fitness);

  const int n_elite = std::max(1, int(config.retain_rate * pop));
  const int n_lottery = int(config.selection_rate * pop);

  std::vector<int> order(pop);
  for (int gen = 0; gen < config.generations; ++gen) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fitness[a] > fitness[b]; });

    // Elites survive as-is; a lottery slice of the rest survives too.
    std::vector<int> survivors(order.begin(), order.begin() + n_elite);
    std::vector<int> rest(order.begin() + n_elite, order.end());
    for (int k = 0; k < n_lottery && !rest.empty(); ++k) {
      const size_t pick = rng.below(rest.size());
      survivors.push_back(rest[pick]);
      rest[pick] = rest.back();
      rest.pop_back();
    }

    std::vector<std::vector<double>> next;
    next.reserve(pop);
    for (int s : survivors) next.push_back(population[s]);

    // Refill with uniform crossover of random surviving parents, then
    // mutate the children gene-wise.
    while (int(next.size()) < pop) {
      const auto& pa = population[survivors[rng.below(survivors.size())]];
      const auto& pb = population[survivors[rng.below(survivors.size())]];
      std::vector<double> child(genes);
      for (int g = 0; g < genes; ++g) child[g] = (rng.next_u64() & 1) ? pa[g] : pb[g];
      for (int g = 0; g < genes; ++g)
        if (rng.uniform() < config.mutation_rate) child[g] += config.mutation_sigma * rng.normal();
      next.push_back(std::move(child));
    }

    population = std::move(next);
    for (int k = 0; k < pop; ++k) fitness[k] = fitness_of(population[k]);
    for (int k = 0; k < pop; ++k) track_best(k);
    result.best_delay_history.push_back(-best_fitness);
  }

  result.allocation = decode_chromosome(best_chrom, inst);
  result.best_delay = -best_fitness;
  result.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<Mat*> MlpModel::parameters() {
  std::vector<Mat*> out;
  for (size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<std::pair<std::string, Mat*>> MlpModel::named_parameters() {
  std::vector<std::pair<std::string, Mat*>> out;
  for (size_t l = 0; l < weights.size(); ++l) {
    out.emplace_back("layer" + std::to_string(l) + ".w", &weights[l]);
    out.emplace_back("layer" + std::to_string(l) + ".b", &biases[l]);
  }
  return out;
}

MlpModel init_mlp(uint64_t seed, int n_users, int n_servers, int hidden_dim, int n_layers) {
  if (n_users < 1 || n_servers < 1 || hidden_dim < 1 || n_layers < 2)
    throw std::invalid_argument("init_mlp: bad dimensions");
  Rng rng(seed);
  MlpModel model;
  model.n0 = n_users;
  model.m0 = n_servers;
  model.hidden_dim = hidden_dim;
  model.n_layers = n_layers;
  model.seed = seed;
  int in = model.input_dim();
  for (int l = 0; l < n_layers; ++l) {
    const int out = (l == n_layers - 1) ? model.output_dim() : hidden_dim;
    model.weights.push_back(glorot(rng, in, out));
    model.biases.push_back(Mat(1, out));
    in = out;
  }
  return model;
}

namespace {

// Flattened [h row-major, d, f^s] with the instance placed in the top-left
// (n0, m0) block and zeros elsewhere.
Mat mlp_input(const MlpModel& model, const McInstance& inst) {
  Mat in(1, model.input_dim());
  const int cn = std::min(inst.n_users, model.n0);
  const int cm = std::min(inst.n_servers, model.m0);
  for (int i = 0; i < cn; ++i)
    for (int j = 0; j < cm; ++j) in(0, i * model.m0 + j) = inst.channel_gain(i, j);
  for (int i = 0; i < cn; ++i) in(0, model.n0 * model.m0 + i) = inst.task_size[i];
  for (int j = 0; j < cm; ++j) in(0, model.n0 * model.m0 + model.n0 + j) = inst.server_compute[j];
  return in;
}

Tensor mlp_net(const MlpModel& model, const std::vector<Tensor>& params, const Tensor& input) {
  Tensor h = input;
  for (int l = 0; l < model.n_layers; ++l) {
    h = add_rowvec(matmul(h, params[2 * l]), params[2 * l + 1]);
    if (l + 1 < model.n_layers) h = leaky_relu(h);
  }
  return h;
}

std::vector<int> index_range(int lo, int hi) {
  std::vector<int> idx(hi - lo);
  std::iota(idx.begin(), idx.end(), lo);
  return idx;
}

}  // namespace

ModelLogits mlp_forward_logits(const MlpModel& model, const std::vector<Tensor>& params,
                               const McInstance& inst) {
  if (inst.n_users != model.n0 || inst.n_servers != model.m0)
    throw std::invalid_argument("mlp_forward_logits: instance size differs from trained size");
  if (params.size() != 2 * model.weights.size())
    throw std::invalid_argument("mlp_forward_logits: parameter list does not match model");
  const int n = model.n0, m = model.m0, nm = n * m;

  Tensor out = mlp_net(model, params, Tensor::constant(mlp_input(model, inst)));
  Tensor flat = reshape(out, model.output_dim(), 1);

  ModelLogits logits;
  logits.x_logits = reshape(row_gather(flat, index_range(0, nm)), n, m);
  logits.p_logits = reshape(row_gather(flat, index_range(nm, 2 * nm)), n, m);
  logits.f_logits = reshape(row_gather(flat, index_range(2 * nm, 3 * nm)), n, m);
  logits.scale_logits = row_gather(flat, index_range(3 * nm, 3 * nm + n));
  return logits;
}

Allocation mlp_forward(const MlpModel& model, const McInstance& inst, MlpMode mode) {
  const int n = inst.n_users, m = inst.n_servers;
  if (mode == MlpMode::kExact && (n != model.n0 || m != model.m0))
    throw std::invalid_argument("mlp_forward: exact mode requires the trained instance size");

  auto params = watch_parameters(const_cast<MlpModel&>(model).parameters(), nullptr);
  Tensor out = mlp_net(model, params, Tensor::constant(mlp_input(model, inst)));
  const Mat& o = out.value();

  // Covered block comes from the network; everything else keeps zero logits,
  // which the projection turns into the uniform allocation.
  const int cn = std::min(n, model.n0);
  const int cm = std::min(m, model.m0);
  const int nm0 = model.n0 * model.m0;
  Mat x_logits(n, m), p_logits(n, m), f_logits(n, m);
  std::vector<double> scale(n, 0.0);
  for (int i = 0; i < cn; ++i)
    for (int j = 0; j < cm; ++j) {
      x_logits(i, j) = o(0, i * model.m0 + j);
      p_logits(i, j) = o(0, nm0 + i * model.m0 + j);
      f_logits(i, j) = o(0, 2 * nm0 + i * model.m0 + j);
    }
  for (int i = 0; i < cn; ++i) scale[i] = o(0, 3 * nm0 + i);
  return project_to_feasible(x_logits, p_logits, f_logits, scale, inst);
}

Allocation random_allocation(const McInstance& inst, uint64_t seed) {
  Rng rng(seed);
  const int n = inst.n_users, m = inst.n_servers;
  Mat x_logits(n, m), p_logits(n, m), f_logits(n, m);
  for (double& v : x_logits.v) v = rng.normal();
  for (double& v : p_logits.v) v = rng.normal();
  for (double& v : f_logits.v) v = rng.normal();
  std::vector<double> scale(n);
  for (double& v : scale) v = rng.normal();
  return project_to_feasible(x_logits, p_logits, f_logits, scale, inst);
}

}  // namespace lognn

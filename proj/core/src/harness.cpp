#include "lognn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "lognn/errors.hpp"
#include "lognn/rng.hpp"

namespace lognn {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

constexpr uint64_t kInstanceSalt = 0x5eed;
constexpr uint64_t kGaSalt = 0x6a6a;
constexpr uint64_t kRandomSalt = 0x7a7a;

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kLognn: return "lognn";
    case Method::kMlpDi: return "mlp_di";
    case Method::kMlpTr: return "mlp_tr";
    case Method::kGa: return "ga";
    case Method::kRandom: return "random";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "lognn") return Method::kLognn;
  if (name == "mlp_di") return Method::kMlpDi;
  if (name == "mlp_tr") return Method::kMlpTr;
  if (name == "ga") return Method::kGa;
  if (name == "random") return Method::kRandom;
  throw std::invalid_argument("unknown method: " + name);
}

void SweepSpec::validate() const {
  if (server_counts.empty()) throw std::invalid_argument("SweepSpec: empty server grid");
  for (int m : server_counts)
    if (m < 1) throw std::invalid_argument("SweepSpec: server counts must be >= 1");
  if (instances_per_size < 1)
    throw std::invalid_argument("SweepSpec: instances_per_size must be >= 1");
  if (methods.empty()) throw std::invalid_argument("SweepSpec: no methods requested");
  ga.validate();
}

SweepResult run_sweep(const SweepSpec& spec, const SweepArtifacts& artifacts) {
  spec.validate();
  for (Method m : spec.methods) {
    if (m == Method::kLognn && artifacts.lognn == nullptr)
      throw ConfigError("run_sweep: method lognn requested but no model artifact given");
    if (m == Method::kMlpDi && artifacts.mlp_di == nullptr)
      throw ConfigError("run_sweep: method mlp_di requested but no model artifact given");
    if (m == Method::kMlpTr)
      for (int mm : spec.server_counts)
        if (!artifacts.mlp_tr.count(mm))
          throw ConfigError("run_sweep: method mlp_tr missing a model for M=" +
                            std::to_string(mm));
  }

  SweepResult result;
  for (int m : spec.server_counts) {
    const int n = 2 * m;
    std::vector<McInstance> instances;
    instances.reserve(spec.instances_per_size);
    for (int k = 0; k < spec.instances_per_size; ++k)
      instances.push_back(generate_instance(
          n, m, Rng::mix(spec.seed, kInstanceSalt + uint64_t(m) * 4099 + uint64_t(k)),
          spec.constants));

    for (Method method : spec.methods) {
      double delay_sum = 0.0, time_sum = 0.0;
      for (int k = 0; k < spec.instances_per_size; ++k) {
        const McInstance& inst = instances[k];
        Allocation alloc;
        const double t0 = now_seconds();
        switch (method) {
          case Method::kLognn:
            alloc = lognn_allocate(*artifacts.lognn, inst);
            break;
          case Method::kMlpDi:
            alloc = mlp_forward(*artifacts.mlp_di, inst, MlpMode::kDirectInference);
            break;
          case Method::kMlpTr:
            alloc = mlp_forward(artifacts.mlp_tr.at(m), inst, MlpMode::kExact);
            break;
          case Method::kGa: {
            GaConfig ga = spec.ga;
            ga.seed = Rng::mix(spec.seed, kGaSalt + uint64_t(m) * 4099 + uint64_t(k));
            alloc = ga_solve(inst, ga).allocation;
            break;
          }
          case Method::kRandom:
            alloc = random_allocation(
                inst, Rng::mix(spec.seed, kRandomSalt + uint64_t(m) * 4099 + uint64_t(k)));
            break;
        }
        const double elapsed = now_seconds() - t0;
        if (!check_feasibility(inst, alloc).feasible())
          throw NumericError("run_sweep: infeasible allocation from " + to_string(method) +
                             " at M=" + std::to_string(m));
        delay_sum += total_delay(inst, alloc);
        time_sum += elapsed;
      }
      SweepRow row;
      row.method = to_string(method);
      row.server_count = m;
      row.user_count = n;
      row.seed = spec.seed;
      row.mean_delay = delay_sum / spec.instances_per_size;
      row.mean_inference_seconds = time_sum / spec.instances_per_size;
      row.mean_delay_plus_inference = row.mean_delay + row.mean_inference_seconds;
      result.rows.push_back(row);
    }
  }
  return result;
}

double measure_inference(const std::function<void()>& solve, int repetitions) {
  if (repetitions < 3) throw std::invalid_argument("measure_inference: repetitions must be >= 3");
  solve();  // warm-up, untimed
  std::vector<double> times(repetitions);
  for (int r = 0; r < repetitions; ++r) {
    const double t0 = now_seconds();
    solve();
    times[r] = now_seconds() - t0;
  }
  std::sort(times.begin(), times.end());
  const int mid = repetitions / 2;
  if (repetitions % 2 == 1) return times[mid];
  return 0.5 * (times[mid - 1] + times[mid]);
}

std::vector<ComparisonRun> run_training_comparison(const ComparisonSpec& spec) {
  std::vector<ComparisonRun> runs;
  TrainConfig config = spec.base;
  config.size_distribution = {{spec.n_users, spec.n_servers}};
  config.validate();

  const std::vector<McInstance> train =
      make_dataset(config.n_train_samples, config.size_distribution, config.seed,
                   config.constants);

  const std::vector<TrainMethod> methods = {TrainMethod::kUnsupervised, TrainMethod::kSupervised,
                                            TrainMethod::kActorCritic};
  std::vector<std::string> backbones = {"lognn"};
  if (spec.include_mlp) backbones.push_back("mlp");

  for (const std::string& backbone : backbones) {
    for (TrainMethod method : methods) {
      TrainConfig cfg = config;
      cfg.method = method;
      ComparisonRun run;
      run.backbone = backbone;
      run.method = method;
      if (backbone == "lognn") {
        LognnModel model = init_model(cfg.seed);
        run.log = method == TrainMethod::kUnsupervised  ? train_unsupervised(model, train, cfg)
                  : method == TrainMethod::kSupervised ? train_supervised(model, train, cfg)
                                                        : train_actor_critic(model, train, cfg);
      } else {
        MlpModel model = init_mlp(cfg.seed, spec.n_users, spec.n_servers);
        run.log = method == TrainMethod::kUnsupervised  ? train_unsupervised(model, train, cfg)
                  : method == TrainMethod::kSupervised ? train_supervised(model, train, cfg)
                                                        : train_actor_critic(model, train, cfg);
      }
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

}  // namespace lognn

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lognn/train.hpp"

namespace lognn {

enum class Method { kLognn, kMlpDi, kMlpTr, kGa, kRandom };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

// Scalability-sweep description. The user count follows N = 2M.
struct SweepSpec {
  std::vector<int> server_counts = desk_grid();
  int instances_per_size = 64;
  std::vector<Method> methods = {Method::kLognn, Method::kGa, Method::kRandom};
  uint64_t seed = 0;
  GaConfig ga;  // budget used by the GA method
  PhysicalConstants constants;

  void validate() const;
  static std::vector<int> desk_grid() { return {2, 4, 8, 10}; }
  static std::vector<int> full_grid() {
    return {2, 3, 4, 5, 6, 7, 15, 16, 17, 18, 19, 20, 25, 26, 27, 28, 29, 30};
  }
};

struct SweepRow {
  std::string method;
  int server_count = 0;
  int user_count = 0;
  uint64_t seed = 0;
  double mean_delay = 0.0;
  double mean_inference_seconds = 0.0;
  double mean_delay_plus_inference = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Trained artifacts the sweep may need. A requested method without its
// artifact raises ConfigError naming the gap.
struct SweepArtifacts {
  const LognnModel* lognn = nullptr;
  const MlpModel* mlp_di = nullptr;
  std::map<int, MlpModel> mlp_tr;  // keyed by server count
};

// Evaluates mean delay and mean single-shot inference time per (method, M)
// cell. Every produced allocation is feasibility-checked. The LOGNN model is
// the same object at every size.
SweepResult run_sweep(const SweepSpec& spec, const SweepArtifacts& artifacts);

// Median wall-clock of `solve` over `repetitions` runs, after one untimed
// warm-up call. repetitions must be >= 3.
double measure_inference(const std::function<void()>& solve, int repetitions);

// Training-method comparison at one fixed size: unsupervised, supervised,
// actor-critic for the LOGNN backbone and optionally the MLP backbone.
struct ComparisonSpec {
  int n_users = 8;
  int n_servers = 4;
  TrainConfig base;  // epochs, batch, sample counts, lr, seed
  bool include_mlp = true;
};

struct ComparisonRun {
  std::string backbone;  // "lognn" | "mlp"
  TrainMethod method = TrainMethod::kUnsupervised;
  TrainLog log;
};

std::vector<ComparisonRun> run_training_comparison(const ComparisonSpec& spec);

}  // namespace lognn

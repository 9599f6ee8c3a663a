#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lognn/adam.hpp"
#include "lognn/baselines.hpp"
#include "lognn/mec.hpp"
#include "lognn/model.hpp"

namespace lognn {

enum class TrainMethod { kUnsupervised, kSupervised, kActorCritic };

std::string to_string(TrainMethod method);
TrainMethod train_method_from_string(const std::string& name);

struct TrainConfig {
  TrainMethod method = TrainMethod::kUnsupervised;
  int epochs = 500;
  int batch_size = 32;
  int n_train_samples = 2048;
  double lr = 1e-4;
  uint64_t seed = 0;
  // (N, M) pairs sampled uniformly per generated instance.
  std::vector<std::pair<int, int>> size_distribution = default_size_distribution();
  int held_out_samples = 256;
  int ga_label_generations = 100;  // GA budget per supervised label
  PhysicalConstants constants;

  void validate() const;
  // M in {2..10} with N = 2M, so one model serves the whole sweep.
  static std::vector<std::pair<int, int>> default_size_distribution();
};

struct EpochRecord {
  double train_objective = 0.0;  // mean total delay over the epoch's instances
  double test_objective = 0.0;   // mean total delay over the held-out set
  double seconds = 0.0;          // training wall-clock, held-out eval excluded
  double critic_mse = 0.0;       // actor-critic only: mean critic fit error
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  TrainMethod method = TrainMethod::kUnsupervised;
  uint64_t seed = 0;
  int skipped_labels = 0;      // supervised: instances whose GA label failed
  std::string aborted_reason;  // set when a numeric abort cut the run short

  bool aborted() const { return !aborted_reason.empty(); }
};

// Instances with sizes sampled from `sizes`, deterministic per seed. The
// dataset carries no labels; the unsupervised trainer cannot read any.
std::vector<McInstance> make_dataset(int count, const std::vector<std::pair<int, int>>& sizes,
                                     uint64_t seed, const PhysicalConstants& constants);

// Held-out stream: derived from the config seed but disjoint from training,
// stratified with equal counts per evaluation size.
std::vector<McInstance> make_held_out(const TrainConfig& config);

// Mean total delay of the model's allocations over a set of instances.
double evaluate_mean_delay(const LognnModel& model, const std::vector<McInstance>& instances);
double evaluate_mean_delay(const MlpModel& model, const std::vector<McInstance>& instances);

// A non-finite loss or gradient aborts the run: the partial log is returned
// with aborted_reason naming the epoch and batch.

// Descends the task-delay objective directly through the projection and the
// model; consumes no labels.
template <class ModelT>
TrainLog train_unsupervised(ModelT& model, const std::vector<McInstance>& train,
                            const TrainConfig& config);

// Regression onto per-instance GA solutions. Labels are produced inside the
// epoch loop, so their generation cost lands in the epoch wall-clock.
template <class ModelT>
TrainLog train_supervised(ModelT& model, const std::vector<McInstance>& train,
                          const TrainConfig& config);

// Critic learns the delay, actor descends the critic's prediction. Requires
// a fixed instance size; allowed to diverge.
template <class ModelT>
TrainLog train_actor_critic(ModelT& actor, const std::vector<McInstance>& train,
                            const TrainConfig& config);

}  // namespace lognn

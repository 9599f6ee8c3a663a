#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lognn/objective.hpp"

namespace lognn {

// Genetic-algorithm settings. retain_rate is the elitist truncation
// fraction, selection_rate the lottery-survival fraction, mutation_rate the
// per-gene perturbation probability.
struct GaConfig {
  int population = 200;
  double retain_rate = 0.4;
  double mutation_rate = 0.2;
  double selection_rate = 0.1;
  int generations = 500;
  uint64_t seed = 0;
  double mutation_sigma = 0.3;  // stddev of the Gaussian gene perturbation

  void validate() const;
};

struct GaResult {
  Allocation allocation;
  double best_delay = 0.0;
  double wall_clock_seconds = 0.0;
  // Best-ever delay after the initial population and after each generation;
  // length generations + 1, non-increasing.
  std::vector<double> best_delay_history;
};

// Evolves flattened logits of length 3*N*M + N (layout [x | p | f | scale]),
// decoded through project_to_feasible. Fitness is negative total delay;
// the best-ever individual is returned.
GaResult ga_solve(const McInstance& inst, const GaConfig& config);

// Gene layout helpers shared with the trainer's label handling.
int chromosome_length(const McInstance& inst);
Allocation decode_chromosome(const std::vector<double>& genes, const McInstance& inst);

// Fixed-size multi-layer perceptron over flattened instance features:
// [channel_gain row-major, task_size, server_compute] in, logits
// [x | p | f | scale] out.
struct MlpModel {
  int n0 = 0;  // trained user count
  int m0 = 0;  // trained server count
  int hidden_dim = 64;
  int n_layers = 4;
  uint64_t seed = 0;
  std::string train_config_hash;
  std::vector<Mat> weights;
  std::vector<Mat> biases;

  int input_dim() const { return n0 * m0 + n0 + m0; }
  int output_dim() const { return 3 * n0 * m0 + n0; }
  std::vector<Mat*> parameters();
  std::vector<std::pair<std::string, Mat*>> named_parameters();
};

MlpModel init_mlp(uint64_t seed, int n_users, int n_servers, int hidden_dim = 64,
                  int n_layers = 4);

enum class MlpMode { kExact, kDirectInference };

// Exact mode requires the instance size to match (n0, m0). Direct-inference
// mode covers the first min(N, n0) users and min(M, m0) servers with the
// network (zero-padding smaller inputs) and assigns every uncovered link the
// uniform allocation (zero logits through the projection).
Allocation mlp_forward(const MlpModel& model, const McInstance& inst, MlpMode mode);

// Trainable forward at the exact size, through tensor ops.
ModelLogits mlp_forward_logits(const MlpModel& model, const std::vector<Tensor>& params,
                               const McInstance& inst);

// Standard-normal logits through the projection.
Allocation random_allocation(const McInstance& inst, uint64_t seed);

}  // namespace lognn

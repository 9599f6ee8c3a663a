#pragma once

#include <cstdint>
#include <vector>

#include "lognn/mat.hpp"

namespace lognn {

// Numerical conventions used across the project.
inline constexpr double kEpsGen = 1e-3;       // generated values clamped to [kEpsGen, 1]
inline constexpr double kEpsFloor = 1e-6;     // divisor floor for f and the rate
inline constexpr double kOffloadSkip = 1e-12; // x below this contributes zero delay
inline constexpr double kFeasTol = 1e-6;      // feasibility check tolerance
inline constexpr double kProjFloor = 1e-5;    // softmax floor inside the projection

// Per-scenario physical constants. The generator draws everything else.
struct PhysicalConstants {
  double bandwidth = 1.0;       // b, Hz
  double noise_power = 0.1;     // sigma^2, W
  double compute_factor = 1.0;  // c, cycles/bit
  double p_max = 1.0;           // per-user transmit power cap, W
};

// One MEC scenario: N users offloading tasks to M servers over shared links.
struct McInstance {
  int n_users = 0;
  int n_servers = 0;
  std::vector<double> task_size;       // d_i, bits, length N
  std::vector<double> server_compute;  // f_j^s, cycles/s, length M
  Mat channel_gain;                    // h_{i,j}, N x M
  double bandwidth = 1.0;
  double noise_power = 0.1;
  double compute_factor = 1.0;
  double p_max = 1.0;
  uint64_t seed = 0;
};

// Decision variables as dense user x server matrices.
struct Allocation {
  Mat offload;  // x_{i,j}, rows sum to 1
  Mat power;    // p_{i,j}, rows sum to <= p_max
  Mat compute;  // f_{i,j}, columns sum to <= f_j^s
};

// Maximum violation magnitude per constraint family.
struct FeasibilityReport {
  double negative_offload = 0.0;    // 3a
  double negative_power = 0.0;      // 3b
  double negative_compute = 0.0;    // 3c
  double offload_row_dev = 0.0;     // 3d: |sum_j x_{i,j} - 1|
  double power_row_excess = 0.0;    // 3e: max(0, sum_j p_{i,j} - p_max)
  double compute_col_excess = 0.0;  // 3f: max(0, sum_i f_{i,j} - f_j^s)

  double max_violation() const;
  bool feasible(double tol = kFeasTol) const { return max_violation() <= tol; }
};

// Draws h, d, f^s from U(0,1) clamped to [kEpsGen, 1]. Order of draws is part
// of the format: task sizes, then server capacities, then the gain matrix
// row-major.
McInstance generate_instance(int n_users, int n_servers, uint64_t seed,
                             const PhysicalConstants& constants = {});

// r_{i,j} = b log2(1 + p h / (interference + sigma^2)), interference summed
// over the other users transmitting to the same server.
Mat transmission_rate(const McInstance& inst, const Mat& power);

// T^com_{i,j} = x d c / f with the divisor floored at kEpsFloor. Entries with
// x below kOffloadSkip are exactly zero.
Mat compute_delay(const McInstance& inst, const Allocation& alloc);

// Sum over all pairs of transmission plus compute delay.
double total_delay(const McInstance& inst, const Allocation& alloc);

FeasibilityReport check_feasibility(const McInstance& inst, const Allocation& alloc);

// Maps unconstrained logits onto the feasible set. Offload rows are floored
// softmaxes (sum exactly 1), power rows add a per-user sigmoid total scale so
// the model can back off below p_max, compute columns spend the full server
// capacity. scale_logits has one entry per user.
Allocation project_to_feasible(const Mat& x_logits, const Mat& p_logits,
                               const Mat& f_logits, const std::vector<double>& scale_logits,
                               const McInstance& inst);

// Closed-form optimum for the single-user single-server case: full offload,
// full power (no interference), full capacity.
double optimal_delay_single(const McInstance& inst);

}  // namespace lognn

#pragma once

#include <vector>

#include "lognn/mec.hpp"
#include "lognn/ops.hpp"

namespace lognn {

// Raw model outputs, before the feasibility projection.
struct ModelLogits {
  Tensor x_logits;      // N x M
  Tensor p_logits;      // N x M
  Tensor f_logits;      // N x M
  Tensor scale_logits;  // N x 1, per-user total-power scale
};

// Projected decision variables.
struct AllocTensors {
  Tensor offload;
  Tensor power;
  Tensor compute;
};

// Tensor-op mirror of project_to_feasible; differentiable end to end.
AllocTensors project_to_feasible_op(const ModelLogits& logits, const McInstance& inst);

// Tensor-op mirror of total_delay. Entries whose offload value is below
// kOffloadSkip are masked out, so the zero-offload convention 0 * (1/0) = 0
// holds for the gradient as well.
Tensor total_delay_op(const McInstance& inst, const AllocTensors& alloc);

// total_delay_op(project_to_feasible_op(logits)) - the training objective.
Tensor objective_op(const McInstance& inst, const ModelLogits& logits);

// Extracts plain matrices from projected tensors.
Allocation to_allocation(const AllocTensors& alloc);

// Watches every parameter on the tape, or wraps them as constant views when
// tape is null (inference mode). Output is parallel to the input list.
std::vector<Tensor> watch_parameters(const std::vector<Mat*>& params, Tape* tape);

}  // namespace lognn

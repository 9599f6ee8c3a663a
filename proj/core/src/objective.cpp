#include "lognn/objective.hpp"

#include <stdexcept>

namespace lognn {

AllocTensors project_to_feasible_op(const ModelLogits& logits, const McInstance& inst) {
  const int n = inst.n_users, m = inst.n_servers;
  if (logits.x_logits.rows() != n || logits.x_logits.cols() != m ||
      logits.scale_logits.rows() != n || logits.scale_logits.cols() != 1)
    throw std::invalid_argument("project_to_feasible_op: logit shapes do not match instance");

  AllocTensors out;
  out.offload = row_softmax_floored(logits.x_logits, kProjFloor);

  // p row = p_max * sigmoid_scale_i * softmax(p logits), scale floored like
  // the softmaxes so power never collapses to exact zero.
  Tensor sig = add_scalar(sigmoid(logits.scale_logits), kProjFloor);
  Tensor scale_vec = scale(sig, inst.p_max / (1.0 + kProjFloor));
  out.power = scale_rows(row_softmax_floored(logits.p_logits, kProjFloor), scale_vec);

  Mat capacity(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) capacity(i, j) = inst.server_compute[j];
  out.compute = mul(col_softmax_floored(logits.f_logits, kProjFloor), Tensor::constant(capacity));
  return out;
}

Tensor total_delay_op(const McInstance& inst, const AllocTensors& alloc) {
  const int n = inst.n_users, m = inst.n_servers;
  if (alloc.offload.rows() != n || alloc.offload.cols() != m)
    throw std::invalid_argument("total_delay_op: allocation shape does not match instance");

  Tensor ph = mul(alloc.power, Tensor::constant(inst.channel_gain));
  Tensor col_total = matmul(Tensor::constant(1, n, 1.0), ph);       // 1 x M
  Tensor col_bcast = matmul(Tensor::constant(n, 1, 1.0), col_total);  // N x M
  Tensor interference = sub(col_bcast, ph);
  Tensor sinr = div(ph, add_scalar(interference, inst.noise_power));
  Tensor rate = scale(log2(add_scalar(sinr, 1.0)), inst.bandwidth);
  Tensor rate_safe = clamp_min(rate, kEpsFloor);
  Tensor f_safe = clamp_min(alloc.compute, kEpsFloor);

  // d_i per row, zeroed where the offload value is negligible.
  Mat d_masked(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      d_masked(i, j) = alloc.offload.value()(i, j) < kOffloadSkip ? 0.0 : inst.task_size[i];
  Tensor dx = mul(Tensor::constant(std::move(d_masked)), alloc.offload);

  Tensor transmission = div(dx, rate_safe);
  Tensor computing = scale(div(dx, f_safe), inst.compute_factor);
  return sum(add(transmission, computing));
}

Tensor objective_op(const McInstance& inst, const ModelLogits& logits) {
  return total_delay_op(inst, project_to_feasible_op(logits, inst));
}

Allocation to_allocation(const AllocTensors& alloc) {
  Allocation a;
  a.offload = alloc.offload.value();
  a.power = alloc.power.value();
  a.compute = alloc.compute.value();
  return a;
}

std::vector<Tensor> watch_parameters(const std::vector<Mat*>& params, Tape* tape) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Mat* p : params)
    out.push_back(tape ? tape->watch(*p) : Tensor::constant_view(*p));
  return out;
}

}  // namespace lognn

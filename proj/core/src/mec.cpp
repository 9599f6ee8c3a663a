#include "lognn/mec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lognn/errors.hpp"
#include "lognn/rng.hpp"

namespace lognn {

namespace {

void require_alloc_shapes(const McInstance& inst, const Allocation& alloc, const char* op) {
  const int n = inst.n_users, m = inst.n_servers;
  auto ok = [&](const Mat& mat) { return mat.rows == n && mat.cols == m; };
  if (!ok(alloc.offload) || !ok(alloc.power) || !ok(alloc.compute))
    throw std::invalid_argument(std::string(op) + ": allocation shape does not match instance");
}

// Floored softmax of one strided slice: y = (softmax(z) + delta) / (1 + K delta).
// Keeps every entry strictly positive while the sum stays exactly 1.
void floored_softmax(const double* z, int count, int stride, double* out, int out_stride) {
  double zmax = z[0];
  for (int k = 1; k < count; ++k) zmax = std::max(zmax, z[size_t(k) * stride]);
  double sum = 0.0;
  for (int k = 0; k < count; ++k) {
    const double e = std::exp(z[size_t(k) * stride] - zmax);
    out[size_t(k) * out_stride] = e;
    sum += e;
  }
  const double denom = sum * (1.0 + count * kProjFloor);
  for (int k = 0; k < count; ++k) {
    double& y = out[size_t(k) * out_stride];
    y = (y + sum * kProjFloor) / denom;
  }
}

}  // namespace

double FeasibilityReport::max_violation() const {
  return std::max({negative_offload, negative_power, negative_compute, offload_row_dev,
                   power_row_excess, compute_col_excess});
}

McInstance generate_instance(int n_users, int n_servers, uint64_t seed,
                             const PhysicalConstants& constants) {
  if (n_users < 1 || n_servers < 1)
    throw std::invalid_argument("generate_instance: counts must be >= 1");
  if (constants.bandwidth <= 0 || constants.noise_power <= 0 || constants.compute_factor <= 0 ||
      constants.p_max <= 0)
    throw std::invalid_argument("generate_instance: physical constants must be > 0");

  Rng rng(seed);
  auto draw = [&] { return std::clamp(rng.uniform(), kEpsGen, 1.0); };

  McInstance inst;
  inst.n_users = n_users;
  inst.n_servers = n_servers;
  inst.seed = seed;
  inst.bandwidth = constants.bandwidth;
  inst.noise_power = constants.noise_power;
  inst.compute_factor = constants.compute_factor;
  inst.p_max = constants.p_max;

  inst.task_size.resize(n_users);
  for (double& d : inst.task_size) d = draw();
  inst.server_compute.resize(n_servers);
  for (double& f : inst.server_compute) f = draw();
  inst.channel_gain = Mat(n_users, n_servers);
  for (double& h : inst.channel_gain.v) h = draw();
  return inst;
}

Mat transmission_rate(const McInstance& inst, const Mat& power) {
  const int n = inst.n_users, m = inst.n_servers;
  if (power.rows != n || power.cols != m)
    throw std::invalid_argument("transmission_rate: power shape does not match instance");

  // Column totals of p*h, so the interference for (i,j) is total_j - p_ij h_ij.
  std::vector<double> col_total(m, 0.0);
  Mat ph(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      ph(i, j) = power(i, j) * inst.channel_gain(i, j);
      col_total[j] += ph(i, j);
    }

  Mat rate(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double interference = col_total[j] - ph(i, j);
      const double sinr = ph(i, j) / (interference + inst.noise_power);
      rate(i, j) = inst.bandwidth * std::log2(1.0 + sinr);
    }
  return rate;
}

Mat compute_delay(const McInstance& inst, const Allocation& alloc) {
  require_alloc_shapes(inst, alloc, "compute_delay");
  const int n = inst.n_users, m = inst.n_servers;
  Mat delay(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double x = alloc.offload(i, j);
      if (x < kOffloadSkip) continue;
      const double f = std::max(alloc.compute(i, j), kEpsFloor);
      delay(i, j) = x * inst.task_size[i] * inst.compute_factor / f;
    }
  return delay;
}

double total_delay(const McInstance& inst, const Allocation& alloc) {
  require_alloc_shapes(inst, alloc, "total_delay");
  const int n = inst.n_users, m = inst.n_servers;
  const Mat rate = transmission_rate(inst, alloc.power);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double x = alloc.offload(i, j);
      if (x < kOffloadSkip) continue;
      const double d = inst.task_size[i];
      const double r = std::max(rate(i, j), kEpsFloor);
      const double f = std::max(alloc.compute(i, j), kEpsFloor);
      total += d * x / r + x * d * inst.compute_factor / f;
    }
  return total;
}

FeasibilityReport check_feasibility(const McInstance& inst, const Allocation& alloc) {
  require_alloc_shapes(inst, alloc, "check_feasibility");
  const int n = inst.n_users, m = inst.n_servers;
  FeasibilityReport rep;
  for (int i = 0; i < n; ++i) {
    double x_sum = 0.0, p_sum = 0.0;
    for (int j = 0; j < m; ++j) {
      rep.negative_offload = std::max(rep.negative_offload, -alloc.offload(i, j));
      rep.negative_power = std::max(rep.negative_power, -alloc.power(i, j));
      rep.negative_compute = std::max(rep.negative_compute, -alloc.compute(i, j));
      x_sum += alloc.offload(i, j);
      p_sum += alloc.power(i, j);
    }
    rep.offload_row_dev = std::max(rep.offload_row_dev, std::abs(x_sum - 1.0));
    rep.power_row_excess = std::max(rep.power_row_excess, p_sum - inst.p_max);
  }
  for (int j = 0; j < m; ++j) {
    double f_sum = 0.0;
    for (int i = 0; i < n; ++i) f_sum += alloc.compute(i, j);
    rep.compute_col_excess = std::max(rep.compute_col_excess, f_sum - inst.server_compute[j]);
  }
  rep.power_row_excess = std::max(rep.power_row_excess, 0.0);
  rep.compute_col_excess = std::max(rep.compute_col_excess, 0.0);
  rep.negative_offload = std::max(rep.negative_offload, 0.0);
  rep.negative_power = std::max(rep.negative_power, 0.0);
  rep.negative_compute = std::max(rep.negative_compute, 0.0);
  return rep;
}

Allocation project_to_feasible(const Mat& x_logits, const Mat& p_logits, const Mat& f_logits,
                               const std::vector<double>& scale_logits, const McInstance& inst) {
  const int n = inst.n_users, m = inst.n_servers;
  if (x_logits.rows != n || x_logits.cols != m || !x_logits.same_shape(p_logits) ||
      !x_logits.same_shape(f_logits) || int(scale_logits.size()) != n)
    throw std::invalid_argument("project_to_feasible: logit shapes do not match instance");
  if (!x_logits.all_finite() || !p_logits.all_finite() || !f_logits.all_finite())
    throw NumericError("project_to_feasible: non-finite logits");
  for (double s : scale_logits)
    if (!std::isfinite(s)) throw NumericError("project_to_feasible: non-finite scale logit");

  Allocation alloc;
  alloc.offload = Mat(n, m);
  alloc.power = Mat(n, m);
  alloc.compute = Mat(n, m);

  for (int i = 0; i < n; ++i) {
    floored_softmax(x_logits.data() + size_t(i) * m, m, 1, alloc.offload.data() + size_t(i) * m, 1);
    floored_softmax(p_logits.data() + size_t(i) * m, m, 1, alloc.power.data() + size_t(i) * m, 1);
    // Per-user total power scale, floored away from zero like the softmaxes.
    const double sig = 1.0 / (1.0 + std::exp(-scale_logits[i]));
    const double scale = inst.p_max * (sig + kProjFloor) / (1.0 + kProjFloor);
    for (int j = 0; j < m; ++j) alloc.power(i, j) *= scale;
  }
  for (int j = 0; j < m; ++j) {
    floored_softmax(f_logits.data() + j, n, m, alloc.compute.data() + j, m);
    for (int i = 0; i < n; ++i) alloc.compute(i, j) *= inst.server_compute[j];
  }
  return alloc;
}

double optimal_delay_single(const McInstance& inst) {
  if (inst.n_users != 1 || inst.n_servers != 1)
    throw std::invalid_argument("optimal_delay_single: requires N = M = 1");
  const double d = inst.task_size[0];
  const double h = inst.channel_gain(0, 0);
  const double fs = inst.server_compute[0];
  const double rate = inst.bandwidth * std::log2(1.0 + inst.p_max * h / inst.noise_power);
  return d / rate + d * inst.compute_factor / fs;
}

}  // namespace lognn

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lognn/model.hpp"

namespace lognn {

// Relative-error denominator floor. Central differences at step 1e-5 carry
// absolute noise around 1e-8 from double rounding of the objective, so
// discrepancies below ~1e-7 on near-zero gradients are measurement noise,
// not chain-rule defects.
inline constexpr double kGradcheckFloor = 1e-3;

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t entries_checked = 0;

  bool pass(double tol = 1e-4) const { return max_rel_error < tol; }
};

// Compares every entry of `analytic` against a central finite difference of
// `eval` (which must read the live parameter values). Parameters are
// perturbed in place and restored.
GradcheckReport finite_difference_check(
    const std::vector<std::pair<std::string, Mat*>>& params,
    const std::function<double()>& eval, const std::vector<Mat>& analytic, double step);

// End-to-end check of d(total_delay)/d(theta) through projection and model
// on one instance.
GradcheckReport gradcheck_model(LognnModel& model, const McInstance& inst, double step = 1e-5);

}  // namespace lognn

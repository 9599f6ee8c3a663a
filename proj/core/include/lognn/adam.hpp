#pragma once

#include <vector>

#include "lognn/mat.hpp"

namespace lognn {

// Adam with bias correction. Moment shapes mirror the parameter list they
// were initialized from.
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Mat> first_moment;
  std::vector<Mat> second_moment;

  static AdamState init(const std::vector<Mat*>& params, double lr);
};

// In-place update of params. grads must be parallel to params and finite.
void adam_step(AdamState& state, const std::vector<Mat*>& params, const std::vector<Mat>& grads);

}  // namespace lognn

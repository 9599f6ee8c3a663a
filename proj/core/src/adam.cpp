#include "lognn/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "lognn/errors.hpp"

namespace lognn {

AdamState AdamState::init(const std::vector<Mat*>& params, double lr) {
  AdamState s;
  s.lr = lr;
  s.first_moment.reserve(params.size());
  s.second_moment.reserve(params.size());
  for (const Mat* p : params) {
    s.first_moment.emplace_back(p->rows, p->cols);
    s.second_moment.emplace_back(p->rows, p->cols);
  }
  return s;
}

void adam_step(AdamState& state, const std::vector<Mat*>& params, const std::vector<Mat>& grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw std::invalid_argument("adam_step: parameter/gradient lists do not match state");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (size_t k = 0; k < params.size(); ++k) {
    Mat& p = *params[k];
    const Mat& g = grads[k];
    if (!p.same_shape(g)) throw std::invalid_argument("adam_step: gradient shape mismatch");
    if (!g.all_finite()) throw NumericError("adam_step: non-finite gradient");
    Mat& m = state.first_moment[k];
    Mat& v = state.second_moment[k];
    for (size_t t = 0; t < p.size(); ++t) {
      m.v[t] = state.beta1 * m.v[t] + (1.0 - state.beta1) * g.v[t];
      v.v[t] = state.beta2 * v.v[t] + (1.0 - state.beta2) * g.v[t] * g.v[t];
      const double mhat = m.v[t] / bc1;
      const double vhat = v.v[t] / bc2;
      p.v[t] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace lognn

#include "lognn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lognn/graph.hpp"

namespace lognn {

GradcheckReport finite_difference_check(
    const std::vector<std::pair<std::string, Mat*>>& params,
    const std::function<double()>& eval, const std::vector<Mat>& analytic, double step) {
  if (params.size() != analytic.size())
    throw std::invalid_argument("finite_difference_check: analytic list does not match params");
  GradcheckReport report;
  for (size_t k = 0; k < params.size(); ++k) {
    Mat& p = *params[k].second;
    if (!p.same_shape(analytic[k]))
      throw std::invalid_argument("finite_difference_check: gradient shape mismatch for " +
                                  params[k].first);
    for (size_t t = 0; t < p.size(); ++t) {
      const double saved = p.v[t];
      p.v[t] = saved + step;
      const double up = eval();
      p.v[t] = saved - step;
      const double down = eval();
      p.v[t] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double an = analytic[k].v[t];
      const double denom = std::max({std::abs(an), std::abs(numeric), kGradcheckFloor});
      const double rel = std::abs(an - numeric) / denom;
      report.entries_checked += 1;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params[k].first + "[" + std::to_string(t) + "]";
        report.worst_analytic = an;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

GradcheckReport gradcheck_model(LognnModel& model, const McInstance& inst, double step) {
  const ProblemGraph graph = encode_graph(inst);
  std::vector<Mat*> params = model.parameters();

  Tape tape;
  std::vector<Tensor> watched = watch_parameters(params, &tape);
  Tensor obj = objective_op(inst, lognn_forward(model, watched, graph));
  tape.backward(obj);
  std::vector<Mat> analytic;
  analytic.reserve(watched.size());
  for (const Tensor& w : watched) analytic.push_back(tape.grad(w));

  auto eval = [&]() {
    auto views = watch_parameters(params, nullptr);
    return objective_op(inst, lognn_forward(model, views, graph)).scalar();
  };
  return finite_difference_check(model.named_parameters(), eval, analytic, step);
}

}  // namespace lognn

#include "lognn/tensor.hpp"

#include <stdexcept>

namespace lognn {

double Tensor::scalar() const {
  if (rows() != 1 || cols() != 1) throw std::invalid_argument("Tensor::scalar: tensor is not 1x1");
  return m->v[0];
}

Tensor Tensor::constant(Mat value) {
  Tensor t;
  t.m = std::make_shared<Mat>(std::move(value));
  return t;
}

Tensor Tensor::constant(int rows, int cols, double fill) { return constant(Mat(rows, cols, fill)); }

Tensor Tensor::constant_view(const Mat& value) {
  Tensor t;
  t.m = std::shared_ptr<const Mat>(&value, [](const Mat*) {});
  return t;
}

Tensor Tape::watch(const Mat& value) {
  Tensor t;
  t.m = std::make_shared<Mat>(value);
  t.tape = this;
  t.node = record(value.rows, value.cols, nullptr);
  return t;
}

int Tape::record(int rows, int cols, BackFn fn) {
  nodes_.push_back(Node{std::move(fn), rows, cols});
  return int(nodes_.size()) - 1;
}

Mat& Tape::grad_slot(int node) {
  Mat& g = grads_[node];
  if (g.v.empty()) g = Mat(nodes_[node].rows, nodes_[node].cols);
  return g;
}

void Tape::backward(const Tensor& root) {
  if (ran_backward_) throw std::invalid_argument("Tape::backward: tape already differentiated");
  if (root.tape != this || root.node < 0)
    throw std::invalid_argument("Tape::backward: root is not recorded on this tape");
  if (root.rows() != 1 || root.cols() != 1)
    throw std::invalid_argument("Tape::backward: root must be scalar");
  ran_backward_ = true;

  grads_.assign(nodes_.size(), Mat{});
  grad_slot(root.node)(0, 0) = 1.0;
  for (int id = root.node; id >= 0; --id) {
    if (grads_[id].v.empty() || !nodes_[id].fn) continue;
    nodes_[id].fn(*this, grads_[id]);
  }
}

Mat Tape::grad(const Tensor& t) const {
  if (t.tape != this || t.node < 0)
    throw std::invalid_argument("Tape::grad: tensor is not recorded on this tape");
  if (!ran_backward_) throw std::invalid_argument("Tape::grad: backward has not run");
  const Mat& g = grads_[t.node];
  if (g.v.empty()) return Mat(nodes_[t.node].rows, nodes_[t.node].cols);
  return g;
}

Tape* merged_tape(const Tensor& a) { return a.tape; }

Tape* merged_tape(const Tensor& a, const Tensor& b) {
  if (a.tape && b.tape && a.tape != b.tape)
    throw std::invalid_argument("tensor operands recorded on different tapes");
  return a.tape ? a.tape : b.tape;
}

}  // namespace lognn

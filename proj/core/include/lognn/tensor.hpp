#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "lognn/mat.hpp"

namespace lognn {

class Tape;

// Handle to an immutable dense value, optionally recorded on a tape. Ops on
// untracked tensors (tape == nullptr) compute values through the exact same
// code path without recording, which is the inference / finite-difference
// mode.
struct Tensor {
  std::shared_ptr<const Mat> m;
  Tape* tape = nullptr;
  int node = -1;

  int rows() const { return m ? m->rows : 0; }
  int cols() const { return m ? m->cols : 0; }
  const Mat& value() const { return *m; }
  double scalar() const;  // requires a 1x1 tensor
  bool tracked() const { return tape != nullptr && node >= 0; }

  // Owning constant (copies).
  static Tensor constant(Mat value);
  static Tensor constant(int rows, int cols, double fill = 0.0);
  // Non-owning constant; caller guarantees the Mat outlives the tensor.
  static Tensor constant_view(const Mat& value);
};

// Reverse-mode recording of one forward pass. Rebuilt per pass (define-by-run);
// backward visits nodes in strict reverse append order, so gradient
// accumulation order is deterministic.
class Tape {
 public:
  using BackFn = std::function<void(Tape&, const Mat& upstream)>;

  // Leaf whose gradient is retained (copies the value).
  Tensor watch(const Mat& value);

  // Seeds d(root)/d(root) = 1 and pulls gradients back to every leaf.
  // root must be scalar. One backward per tape.
  void backward(const Tensor& root);

  // Gradient of the last backward root w.r.t. a tracked tensor. Returns a
  // zero matrix when the tensor did not influence the root.
  Mat grad(const Tensor& t) const;

  size_t size() const { return nodes_.size(); }

  // Op-implementation interface.
  int record(int rows, int cols, BackFn fn);
  Mat& grad_slot(int node);  // lazily allocated accumulator

 private:
  struct Node {
    BackFn fn;
    int rows = 0, cols = 0;
  };
  std::vector<Node> nodes_;
  std::vector<Mat> grads_;
  bool ran_backward_ = false;
};

// The tape shared by a set of operands; null when all are constants.
Tape* merged_tape(const Tensor& a);
Tape* merged_tape(const Tensor& a, const Tensor& b);

}  // namespace lognn

#pragma once

#include <vector>

#include "lognn/tensor.hpp"

namespace lognn {

// LeakyReLU slope (the factor applied to negative inputs).
inline constexpr double kLeakySlope = 0.01;

// Elementwise and broadcast arithmetic.
Tensor add(const Tensor& a, const Tensor& b);
Tensor add_rowvec(const Tensor& x, const Tensor& bias);  // bias is 1 x cols
Tensor add_scalar(const Tensor& a, double s);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor div(const Tensor& a, const Tensor& b);  // divisor must be nonzero everywhere

Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise nonlinearities.
Tensor log2(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = kLeakySlope);
Tensor clamp_min(const Tensor& a, double floor);

// Softmaxes. The floored variants add a small mass delta to every entry and
// renormalize, so outputs stay strictly positive while sums remain exact;
// they back the feasibility projection.
Tensor row_softmax(const Tensor& a);
Tensor col_softmax(const Tensor& a);
Tensor row_softmax_floored(const Tensor& a, double delta);
Tensor col_softmax_floored(const Tensor& a, double delta);

// Reductions to 1x1.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Layout ops.
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor reshape(const Tensor& a, int rows, int cols);
Tensor col_slice(const Tensor& a, int col);               // one column as n x 1
Tensor row_gather(const Tensor& a, std::vector<int> idx);

// Per-row scaling: out[r,:] = x[r,:] * w[r], w is rows x 1.
Tensor scale_rows(const Tensor& x, const Tensor& w);

// Segment ops over contiguous row blocks. offsets has S+1 entries delimiting
// the blocks; used for per-node neighbor aggregation where segment s is the
// set of incoming links of node s.
Tensor segment_softmax(const Tensor& scores, std::vector<int> offsets);  // scores are L x 1
Tensor segment_mean(const Tensor& x, std::vector<int> offsets);          // L x H -> S x H

}  // namespace lognn

#include "lognn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "lognn/errors.hpp"

namespace lognn {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void check_finite(const Mat& out, const char* op) {
  if (!out.all_finite()) throw NumericError(std::string(op) + ": non-finite result");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

// The lambda-to-std::function conversion only happens when recording, so
// untracked (inference) evaluation skips the closure allocation.
template <class Fn>
Tensor finish(Tape* tp, bool tracked_input, Mat out, Fn&& fn, const char* op) {
  check_finite(out, op);
  Tensor t;
  const int r = out.rows, c = out.cols;
  t.m = std::make_shared<Mat>(std::move(out));
  if (tp && tracked_input) {
    t.tape = tp;
    t.node = tp->record(r, c, std::forward<Fn>(fn));
  }
  return t;
}

// Accumulates into the gradient slot of `node` if it is tracked.
template <class F>
void acc(Tape& T, int node, F&& fill) {
  if (node < 0) return;
  fill(T.grad_slot(node));
}

// Softmax of a strided slice, max-shifted. Returns the (unfloored) softmax.
void softmax_slice(const double* z, int count, int stride, double* out, int out_stride) {
  double zmax = z[0];
  for (int k = 1; k < count; ++k) zmax = std::max(zmax, z[size_t(k) * stride]);
  double total = 0.0;
  for (int k = 0; k < count; ++k) {
    const double e = std::exp(z[size_t(k) * stride] - zmax);
    out[size_t(k) * out_stride] = e;
    total += e;
  }
  for (int k = 0; k < count; ++k) out[size_t(k) * out_stride] /= total;
}

// dz = s * (g - <s, g>) for one softmax slice.
void softmax_back_slice(const double* s, const double* g, int count, int stride, double scale,
                        double* dz, int dz_stride) {
  double dot = 0.0;
  for (int k = 0; k < count; ++k) dot += s[size_t(k) * stride] * g[size_t(k) * stride];
  for (int k = 0; k < count; ++k)
    dz[size_t(k) * dz_stride] +=
        scale * s[size_t(k) * stride] * (g[size_t(k) * stride] - dot);
  // scale folds in the floored-softmax renormalization factor
}

Tensor softmax_impl(const Tensor& a, bool by_rows, double delta, const char* op) {
  Tape* tp = merged_tape(a);
  const Mat& x = a.value();
  const int n = x.rows, m = x.cols;
  const int slices = by_rows ? n : m;
  const int count = by_rows ? m : n;
  const int stride = by_rows ? 1 : m;

  Mat out(n, m);
  for (int s = 0; s < slices; ++s) {
    const size_t base = by_rows ? size_t(s) * m : size_t(s);
    softmax_slice(x.data() + base, count, stride, out.data() + base, stride);
  }
  auto sm = std::make_shared<Mat>(out);  // pre-floor softmax saved for backward
  if (delta > 0.0) {
    const double denom = 1.0 + count * delta;
    for (double& y : out.v) y = (y + delta) / denom;
  }
  const double back_scale = delta > 0.0 ? 1.0 / (1.0 + count * delta) : 1.0;

  auto fn = [sm, an = a.node, slices, count, stride, by_rows, n, m, back_scale](
                Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) {
      for (int s = 0; s < slices; ++s) {
        const size_t base = by_rows ? size_t(s) * m : size_t(s);
        softmax_back_slice(sm->data() + base, g.data() + base, count, stride, back_scale,
                           da.data() + base, stride);
      }
    });
  };
  return finish(tp, a.tracked(), std::move(out), std::move(fn), op);
}

template <class FwdFn, class DerivFn>
Tensor unary_elementwise(const Tensor& a, FwdFn f, DerivFn df, const char* op) {
  Tape* tp = merged_tape(a);
  const Mat& x = a.value();
  Mat out(x.rows, x.cols);
  for (size_t k = 0; k < x.size(); ++k) out.v[k] = f(x.v[k]);
  auto xm = a.m;
  auto fn = [xm, an = a.node, df](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) {
      for (size_t k = 0; k < g.size(); ++k) da.v[k] += g.v[k] * df(xm->v[k]);
    });
  };
  return finish(tp, a.tracked(), std::move(out), std::move(fn), op);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tape* tp = merged_tape(a, b);
  Mat out = a.value();
  for (size_t k = 0; k < out.size(); ++k) out.v[k] += b.value().v[k];
  auto fn = [an = a.node, bn = b.node](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (size_t k = 0; k < g.size(); ++k) da.v[k] += g.v[k]; });
    acc(T, bn, [&](Mat& db) { for (size_t k = 0; k < g.size(); ++k) db.v[k] += g.v[k]; });
  };
  return finish(tp, a.tracked() || b.tracked(), std::move(out), std::move(fn), "add");
}

Tensor add_rowvec(const Tensor& x, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols())
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols");
  Tape* tp = merged_tape(x, bias);
  const int n = x.rows(), m = x.cols();
  Mat out = x.value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out(i, j) += bias.value()(0, j);
  auto fn = [xn = x.node, bn = bias.node, n, m](Tape& T, const Mat& g) {
    acc(T, xn, [&](Mat& dx) { for (size_t k = 0; k < g.size(); ++k) dx.v[k] += g.v[k]; });
    acc(T, bn, [&](Mat& db) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) db(0, j) += g(i, j);
    });
  };
  return finish(tp, x.tracked() || bias.tracked(), std::move(out), std::move(fn), "add_rowvec");
}

Tensor add_scalar(const Tensor& a, double s) {
  Tape* tp = merged_tape(a);
  Mat out = a.value();
  for (double& v : out.v) v += s;
  auto fn = [an = a.node](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (size_t k = 0; k < g.size(); ++k) da.v[k] += g.v[k]; });
  };
  return finish(tp, a.tracked(), std::move(out), std::move(fn), "add_scalar");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  Tape* tp = merged_tape(a, b);
  Mat out = a.value();
  for (size_t k = 0; k < out.size(); ++k) out.v[k] -= b.value().v[k];
  auto fn = [an = a.node, bn = b.node](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (size_t k = 0; k < g.size(); ++k) da.v[k] += g.v[k]; });
    acc(T, bn, [&](Mat& db) { for (size_t k = 0; k < g.size(); ++k) db.v[k] -= g.v[k]; });
  };
  return finish(tp, a.tracked() || b.tracked(), std::move(out), std::move(fn), "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tape* tp = merged_tape(a, b);
  Mat out = a.value();
  for (size_t k = 0; k < out.size(); ++k) out.v[k] *= b.value().v[k];
  auto fn = [am = a.m, bm = b.m, an = a.node, bn = b.node](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (size_t k = 0; k < g.size(); ++k) da.v[k] += g.v[k] * bm->v[k]; });
    acc(T, bn, [&](Mat& db) { for (size_t k = 0; k < g.size(); ++k) db.v[k] += g.v[k] * am->v[k]; });
  };
  return finish(tp, a.tracked() || b.tracked(), std::move(out), std::move(fn), "mul");
}

Tensor scale(const Tensor& a, double s) {
  Tape* tp = merged_tape(a);
  Mat out = a.value();
  for (double& v : out.v) v *= s;
  auto fn = [an = a.node, s](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (size_t k = 0; k < g.size(); ++k) da.v[k] += s * g.v[k]; });
  };
  return finish(tp, a.tracked(), std::move(out), std::move(fn), "scale");
}

Tensor div(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "div");
  for (double v : b.value().v)
    if (v == 0.0) throw NumericError("div: zero divisor");
  Tape* tp = merged_tape(a, b);
  Mat out = a.value();
  for (size_t k = 0; k < out.size(); ++k) out.v[k] /= b.value().v[k];
  auto om = std::make_shared<Mat>(out);
  auto fn = [bm = b.m, om, an = a.node, bn = b.node](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (size_t k = 0; k < g.size(); ++k) da.v[k] += g.v[k] / bm->v[k]; });
    acc(T, bn, [&](Mat& db) {
      for (size_t k = 0; k < g.size(); ++k) db.v[k] -= g.v[k] * om->v[k] / bm->v[k];
    });
  };
  return finish(tp, a.tracked() || b.tracked(), std::move(out), std::move(fn), "div");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions do not match");
  Tape* tp = merged_tape(a, b);
  Mat out(a.rows(), b.cols());
  matmul_acc(a.value(), b.value(), out);
  auto fn = [am = a.m, bm = b.m, an = a.node, bn = b.node](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) {
      // dA[i,k] += sum_j g[i,j] B[k,j]
      const int n = da.rows, kdim = da.cols, m = g.cols;
      for (int i = 0; i < n; ++i) {
        const double* grow = g.data() + size_t(i) * m;
        double* darow = da.data() + size_t(i) * kdim;
        for (int k = 0; k < kdim; ++k) {
          const double* brow = bm->data() + size_t(k) * m;
          double dot = 0.0;
          for (int j = 0; j < m; ++j) dot += grow[j] * brow[j];
          darow[k] += dot;
        }
      }
    });
    acc(T, bn, [&](Mat& db) {
      // dB[k,j] += sum_i A[i,k] g[i,j]
      const int n = am->rows, kdim = db.rows, m = db.cols;
      for (int i = 0; i < n; ++i) {
        const double* arow = am->data() + size_t(i) * kdim;
        const double* grow = g.data() + size_t(i) * m;
        for (int k = 0; k < kdim; ++k) {
          const double aik = arow[k];
          if (aik == 0.0) continue;
          double* dbrow = db.data() + size_t(k) * m;
          for (int j = 0; j < m; ++j) dbrow[j] += aik * grow[j];
        }
      }
    });
  };
  return finish(tp, a.tracked() || b.tracked(), std::move(out), std::move(fn), "matmul");
}

Tensor log2(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::log2(x); }, [](double x) { return 1.0 / (x * kLn2); },
      "log2");
}

Tensor exp(const Tensor& a) {
  return unary_elementwise(
      a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); }, "exp");
}

Tensor sigmoid(const Tensor& a) {
  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  return unary_elementwise(
      a, sig, [sig](double x) { const double y = sig(x); return y * (1.0 - y); }, "sigmoid");
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary_elementwise(
      a, [slope](double x) { return x >= 0.0 ? x : slope * x; },
      [slope](double x) { return x >= 0.0 ? 1.0 : slope; }, "leaky_relu");
}

Tensor clamp_min(const Tensor& a, double floor) {
  return unary_elementwise(
      a, [floor](double x) { return std::max(x, floor); },
      [floor](double x) { return x > floor ? 1.0 : 0.0; }, "clamp_min");
}

Tensor row_softmax(const Tensor& a) { return softmax_impl(a, true, 0.0, "row_softmax"); }
Tensor col_softmax(const Tensor& a) { return softmax_impl(a, false, 0.0, "col_softmax"); }
Tensor row_softmax_floored(const Tensor& a, double delta) {
  return softmax_impl(a, true, delta, "row_softmax_floored");
}
Tensor col_softmax_floored(const Tensor& a, double delta) {
  return softmax_impl(a, false, delta, "col_softmax_floored");
}

Tensor sum(const Tensor& a) {
  Tape* tp = merged_tape(a);
  double total = 0.0;
  for (double v : a.value().v) total += v;
  auto fn = [an = a.node](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (double& v : da.v) v += g.v[0]; });
  };
  return finish(tp, a.tracked(), Mat(1, 1, total), std::move(fn), "sum");
}

Tensor mean(const Tensor& a) {
  Tape* tp = merged_tape(a);
  double total = 0.0;
  for (double v : a.value().v) total += v;
  const double inv = 1.0 / double(a.value().size());
  auto fn = [an = a.node, inv](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (double& v : da.v) v += g.v[0] * inv; });
  };
  return finish(tp, a.tracked(), Mat(1, 1, total * inv), std::move(fn), "mean");
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row counts differ");
  Tape* tp = merged_tape(a, b);
  const int n = a.rows(), ca = a.cols(), cb = b.cols();
  Mat out(n, ca + cb);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < ca; ++j) out(i, j) = a.value()(i, j);
    for (int j = 0; j < cb; ++j) out(i, ca + j) = b.value()(i, j);
  }
  auto fn = [an = a.node, bn = b.node, n, ca, cb](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < ca; ++j) da(i, j) += g(i, j);
    });
    acc(T, bn, [&](Mat& db) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < cb; ++j) db(i, j) += g(i, ca + j);
    });
  };
  return finish(tp, a.tracked() || b.tracked(), std::move(out), std::move(fn), "concat_cols");
}

Tensor reshape(const Tensor& a, int rows, int cols) {
  if (rows * cols != a.rows() * a.cols())
    throw std::invalid_argument("reshape: element count changes");
  Tape* tp = merged_tape(a);
  Mat out(rows, cols);
  out.v = a.value().v;
  auto fn = [an = a.node](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (size_t k = 0; k < g.size(); ++k) da.v[k] += g.v[k]; });
  };
  return finish(tp, a.tracked(), std::move(out), std::move(fn), "reshape");
}

Tensor col_slice(const Tensor& a, int col) {
  if (col < 0 || col >= a.cols()) throw std::invalid_argument("col_slice: column out of range");
  Tape* tp = merged_tape(a);
  const int n = a.rows();
  Mat out(n, 1);
  for (int i = 0; i < n; ++i) out(i, 0) = a.value()(i, col);
  auto fn = [an = a.node, col, n](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) { for (int i = 0; i < n; ++i) da(i, col) += g(i, 0); });
  };
  return finish(tp, a.tracked(), std::move(out), std::move(fn), "col_slice");
}

Tensor row_gather(const Tensor& a, std::vector<int> idx) {
  for (int r : idx)
    if (r < 0 || r >= a.rows()) throw std::invalid_argument("row_gather: index out of range");
  Tape* tp = merged_tape(a);
  const int m = a.cols();
  Mat out(int(idx.size()), m);
  for (size_t t = 0; t < idx.size(); ++t)
    std::copy_n(a.value().data() + size_t(idx[t]) * m, m, out.data() + t * m);
  auto fn = [an = a.node, idx = std::move(idx), m](Tape& T, const Mat& g) {
    acc(T, an, [&](Mat& da) {
      for (size_t t = 0; t < idx.size(); ++t) {
        const double* grow = g.data() + t * m;
        double* darow = da.data() + size_t(idx[t]) * m;
        for (int j = 0; j < m; ++j) darow[j] += grow[j];
      }
    });
  };
  return finish(tp, a.tracked(), std::move(out), std::move(fn), "row_gather");
}

Tensor scale_rows(const Tensor& x, const Tensor& w) {
  if (w.rows() != x.rows() || w.cols() != 1)
    throw std::invalid_argument("scale_rows: weight must be rows x 1");
  Tape* tp = merged_tape(x, w);
  const int n = x.rows(), m = x.cols();
  Mat out(n, m);
  for (int i = 0; i < n; ++i) {
    const double wi = w.value()(i, 0);
    for (int j = 0; j < m; ++j) out(i, j) = x.value()(i, j) * wi;
  }
  auto fn = [xm = x.m, wm = w.m, xn = x.node, wn = w.node, n, m](Tape& T, const Mat& g) {
    acc(T, xn, [&](Mat& dx) {
      for (int i = 0; i < n; ++i) {
        const double wi = wm->v[i];
        for (int j = 0; j < m; ++j) dx(i, j) += g(i, j) * wi;
      }
    });
    acc(T, wn, [&](Mat& dw) {
      for (int i = 0; i < n; ++i) {
        double dot = 0.0;
        for (int j = 0; j < m; ++j) dot += g(i, j) * xm->v[size_t(i) * m + j];
        dw(i, 0) += dot;
      }
    });
  };
  return finish(tp, x.tracked() || w.tracked(), std::move(out), std::move(fn), "scale_rows");
}

namespace {
void check_offsets(const std::vector<int>& off, int total, const char* op) {
  if (off.empty() || off.front() != 0 || off.back() != total)
    throw std::invalid_argument(std::string(op) + ": bad segment offsets");
  for (size_t s = 1; s < off.size(); ++s)
    if (off[s] <= off[s - 1])
      throw std::invalid_argument(std::string(op) + ": empty segment");
}
}  // namespace

Tensor segment_softmax(const Tensor& scores, std::vector<int> offsets) {
  if (scores.cols() != 1) throw std::invalid_argument("segment_softmax: scores must be L x 1");
  check_offsets(offsets, scores.rows(), "segment_softmax");
  Tape* tp = merged_tape(scores);
  const int L = scores.rows();
  Mat out(L, 1);
  for (size_t s = 0; s + 1 < offsets.size(); ++s) {
    const int lo = offsets[s], len = offsets[s + 1] - offsets[s];
    softmax_slice(scores.value().data() + lo, len, 1, out.data() + lo, 1);
  }
  auto om = std::make_shared<Mat>(out);
  auto fn = [om, sn = scores.node, offsets = std::move(offsets)](Tape& T, const Mat& g) {
    acc(T, sn, [&](Mat& dz) {
      for (size_t s = 0; s + 1 < offsets.size(); ++s) {
        const int lo = offsets[s], len = offsets[s + 1] - offsets[s];
        softmax_back_slice(om->data() + lo, g.data() + lo, len, 1, 1.0, dz.data() + lo, 1);
      }
    });
  };
  return finish(tp, scores.tracked(), std::move(out), std::move(fn), "segment_softmax");
}

Tensor segment_mean(const Tensor& x, std::vector<int> offsets) {
  check_offsets(offsets, x.rows(), "segment_mean");
  Tape* tp = merged_tape(x);
  const int S = int(offsets.size()) - 1, m = x.cols();
  Mat out(S, m);
  for (int s = 0; s < S; ++s) {
    const int lo = offsets[s], hi = offsets[s + 1];
    const double inv = 1.0 / double(hi - lo);
    for (int r = lo; r < hi; ++r)
      for (int j = 0; j < m; ++j) out(s, j) += x.value()(r, j) * inv;
  }
  auto fn = [xn = x.node, offsets = std::move(offsets), S, m](Tape& T, const Mat& g) {
    acc(T, xn, [&](Mat& dx) {
      for (int s = 0; s < S; ++s) {
        const int lo = offsets[s], hi = offsets[s + 1];
        const double inv = 1.0 / double(hi - lo);
        for (int r = lo; r < hi; ++r)
          for (int j = 0; j < m; ++j) dx(r, j) += g(s, j) * inv;
      }
    });
  };
  return finish(tp, x.tracked(), std::move(out), std::move(fn), "segment_mean");
}

}  // namespace lognn

#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lognn {

// Dense row-major matrix of doubles. Column vectors are n x 1.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(size_t(r) * c, fill) {}

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return v[size_t(r) * cols + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return v[size_t(r) * cols + c];
  }

  size_t size() const { return v.size(); }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  static Mat column(const std::vector<double>& values) {
    Mat m(int(values.size()), 1);
    m.v = values;
    return m;
  }
};

// C += A * B, inner loop over contiguous columns of B so it vectorizes.
inline void matmul_acc(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols);
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int i = 0; i < n; ++i) {
    const double* arow = a.data() + size_t(i) * k;
    double* crow = c.data() + size_t(i) * m;
    for (int kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      if (aik == 0.0) continue;
      const double* brow = b.data() + size_t(kk) * m;
      for (int j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  matmul_acc(a, b, c);
  return c;
}

}  // namespace lognn

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace actens {

// Minimal row-major dense matrix of doubles; sized for desk-scale networks.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// out = a * b
inline void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  out = Matrix(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (int j = 0; j < b.cols; ++j) oi[j] += aik * bk[j];
    }
  }
}

// out = a^T * b
inline void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_at_b: row counts differ");
  out = Matrix(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* ak = a.row(k);
    const double* bk = b.row(k);
    for (int i = 0; i < a.cols; ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* oi = out.row(i);
      for (int j = 0; j < b.cols; ++j) oi[j] += aki * bk[j];
    }
  }
}

// out = a * b^T
inline void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_a_bt: column counts differ");
  out = Matrix(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      oi[j] = s;
    }
  }
}

}  // namespace actens

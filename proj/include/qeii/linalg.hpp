#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qeii {

using Vec = std::vector<double>;

/// Dense row-major matrix. All model weights in this project are small, so a
/// plain triple-loop multiply is plenty.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  return out;
}

/// a^T * b without materialising the transpose.
inline Matrix matmul_at(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_at: shape mismatch");
  Matrix out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        out(i, j) += aki * b(k, j);
      }
    }
  }
  return out;
}

/// a * b^T.
inline Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_bt: shape mismatch");
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(j, k);
      out(i, j) = acc;
    }
  }
  return out;
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

/// y += a * x
inline void axpy(double a, const Vec& x, Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double squared_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("squared_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace qeii

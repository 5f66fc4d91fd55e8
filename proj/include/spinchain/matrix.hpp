// Copyright 2026 The spinchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPINCHAIN_MATRIX_HPP
#define SPINCHAIN_MATRIX_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace spinchain {

/// Dense row-major matrix of doubles. Sector kernels are small ((N+1)^2),
/// so no sparse or blocked storage is needed.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline Matrix identity_matrix(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

/// y = A.x, accumulated in extended precision.
inline std::vector<double> apply_matrix(const Matrix &a, const std::vector<double> &x) {
  if (a.cols != x.size()) throw std::invalid_argument("apply_matrix: dimension mismatch");
  std::vector<double> y(a.rows, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r) {
    long double acc = 0.0L;
    const double *row = a.data.data() + r * a.cols;
    for (std::size_t c = 0; c < a.cols; ++c) acc += static_cast<long double>(row[c]) * x[c];
    y[r] = static_cast<double>(acc);
  }
  return y;
}

inline Matrix multiply(const Matrix &a, const Matrix &b) {
  if (a.cols != b.rows) throw std::invalid_argument("multiply: dimension mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t c = 0; c < b.cols; ++c) {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < a.cols; ++k) {
        acc += static_cast<long double>(a(r, k)) * b(k, c);
      }
      out(r, c) = static_cast<double>(acc);
    }
  }
  return out;
}

}  // namespace spinchain

#endif

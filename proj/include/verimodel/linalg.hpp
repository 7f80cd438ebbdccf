//===-- linalg.hpp - Dense matrices and Householder QR ----------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstddef>
#include <vector>

namespace verimodel {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  Matrix transpose() const;
  Matrix multiply(const Matrix& other) const;
  std::vector<double> multiply(const std::vector<double>& v) const;
};

// Compact Householder QR of an m x n matrix with m >= n (no pivoting).
struct QrDecomposition {
  Matrix qr;                  // Householder vectors below, R above
  std::vector<double> rdiag;  // diagonal of R

  // Columns whose |R_jj| falls below rel_tol * max|R_kk|.
  std::vector<std::size_t> deficient_columns(double rel_tol = 1e-10) const;
  bool full_rank(double rel_tol = 1e-10) const;

  // Least-squares solution of A x = b (requires full rank).
  std::vector<double> solve(const std::vector<double>& b) const;

  // (A^T A)^{-1} = R^{-1} R^{-T} (requires full rank).
  Matrix normal_matrix_inverse() const;
};

QrDecomposition qr_decompose(const Matrix& a);

}  // namespace verimodel

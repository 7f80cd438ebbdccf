//===-- linalg.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace verimodel {

Matrix Matrix::transpose() const {
  Matrix t(cols, rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      t.at(c, r) = at(r, c);
    }
  }
  return t;
}

Matrix Matrix::multiply(const Matrix& other) const {
  if (cols != other.rows) throw std::invalid_argument("matrix shape mismatch");
  Matrix out(rows, other.cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < cols; ++k) {
      double v = at(r, k);
      if (v == 0.0) continue;
      for (std::size_t c = 0; c < other.cols; ++c) {
        out.at(r, c) += v * other.at(k, c);
      }
    }
  }
  return out;
}

std::vector<double> Matrix::multiply(const std::vector<double>& v) const {
  if (cols != v.size()) throw std::invalid_argument("matrix/vector mismatch");
  std::vector<double> out(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += at(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

QrDecomposition qr_decompose(const Matrix& a) {
  if (a.rows < a.cols) {
    throw std::invalid_argument("QR needs at least as many rows as columns");
  }
  QrDecomposition d;
  d.qr = a;
  d.rdiag.assign(a.cols, 0.0);
  Matrix& qr = d.qr;
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;

  for (std::size_t k = 0; k < n; ++k) {
    // 2-norm of the k-th column below the diagonal, with scaling.
    double nrm = 0.0;
    for (std::size_t i = k; i < m; ++i) {
      nrm = std::hypot(nrm, qr.at(i, k));
    }
    if (nrm != 0.0) {
      if (qr.at(k, k) < 0.0) nrm = -nrm;
      for (std::size_t i = k; i < m; ++i) qr.at(i, k) /= nrm;
      qr.at(k, k) += 1.0;
      for (std::size_t j = k + 1; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += qr.at(i, k) * qr.at(i, j);
        s = -s / qr.at(k, k);
        for (std::size_t i = k; i < m; ++i) qr.at(i, j) += s * qr.at(i, k);
      }
    }
    d.rdiag[k] = -nrm;
  }
  return d;
}

std::vector<std::size_t> QrDecomposition::deficient_columns(double rel_tol) const {
  double max_diag = 0.0;
  for (double v : rdiag) max_diag = std::max(max_diag, std::abs(v));
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < rdiag.size(); ++j) {
    if (std::abs(rdiag[j]) <= rel_tol * max_diag) out.push_back(j);
  }
  return out;
}

bool QrDecomposition::full_rank(double rel_tol) const {
  return deficient_columns(rel_tol).empty();
}

std::vector<double> QrDecomposition::solve(const std::vector<double>& b) const {
  const std::size_t m = qr.rows;
  const std::size_t n = qr.cols;
  if (b.size() != m) throw std::invalid_argument("rhs length mismatch");
  std::vector<double> y = b;

  // Apply the Householder reflections: y = Q^T b.
  for (std::size_t k = 0; k < n; ++k) {
    if (qr.at(k, k) == 0.0) continue;
    double s = 0.0;
    for (std::size_t i = k; i < m; ++i) s += qr.at(i, k) * y[i];
    s = -s / qr.at(k, k);
    for (std::size_t i = k; i < m; ++i) y[i] += s * qr.at(i, k);
  }

  // Back substitution against R.
  std::vector<double> x(n, 0.0);
  for (std::size_t kk = n; kk-- > 0;) {
    double acc = y[kk];
    for (std::size_t j = kk + 1; j < n; ++j) acc -= qr.at(kk, j) * x[j];
    x[kk] = acc / rdiag[kk];
  }
  return x;
}

Matrix QrDecomposition::normal_matrix_inverse() const {
  const std::size_t n = qr.cols;
  // R^{-1} by back substitution against the identity.
  Matrix rinv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> x(n, 0.0);
    for (std::size_t kk = n; kk-- > 0;) {
      double acc = kk == col ? 1.0 : 0.0;
      for (std::size_t j = kk + 1; j < n; ++j) acc -= qr.at(kk, j) * x[j];
      x[kk] = acc / rdiag[kk];
    }
    for (std::size_t r = 0; r < n; ++r) rinv.at(r, col) = x[r];
  }
  // (A^T A)^{-1} = R^{-1} R^{-T}.
  Matrix out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += rinv.at(r, k) * rinv.at(c, k);
      out.at(r, c) = acc;
    }
  }
  return out;
}

}  // namespace verimodel

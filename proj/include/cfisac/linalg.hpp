// Copyright 2026 The cfisac Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <vector>

#include "cfisac/common.hpp"

namespace cfisac {

using CVector = std::vector<cdouble>;

// Dense complex matrix, column-major so beam/channel columns are
// contiguous.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(int rows, int cols) : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  cdouble& operator()(int r, int c) { return d_[static_cast<std::size_t>(c) * rows_ + r]; }
  const cdouble& operator()(int r, int c) const { return d_[static_cast<std::size_t>(c) * rows_ + r]; }

  cdouble* col(int c) { return d_.data() + static_cast<std::size_t>(c) * rows_; }
  const cdouble* col(int c) const { return d_.data() + static_cast<std::size_t>(c) * rows_; }

  CVector col_copy(int c) const { return CVector(col(c), col(c) + rows_); }

  cdouble* data() { return d_.data(); }
  const cdouble* data() const { return d_.data(); }
  std::size_t size() const { return d_.size(); }

  void set_zero() { std::fill(d_.begin(), d_.end(), cdouble{0.0, 0.0}); }

  double squared_frobenius() const {
    double s = 0.0;
    for (const auto& v : d_) s += std::norm(v);
    return s;
  }

  void scale(double s) {
    for (auto& v : d_) v *= s;
  }

  bool same_shape(const CMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<cdouble> d_;
};

// Conjugated inner product <a, b> = a^H b.
inline cdouble cdot(const cdouble* a, const cdouble* b, int n) {
  cdouble s{0.0, 0.0};
  for (int i = 0; i < n; ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline cdouble cdot(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) throw shape_error("cdot: size mismatch");
  return cdot(a.data(), b.data(), static_cast<int>(a.size()));
}

inline double squared_norm(const CVector& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return s;
}

inline double norm(const CVector& v) { return std::sqrt(squared_norm(v)); }

// y = M x for a column-major matrix.
inline CVector matvec(const CMatrix& m, const CVector& x) {
  if (static_cast<int>(x.size()) != m.cols()) throw shape_error("matvec: size mismatch");
  CVector y(m.rows(), cdouble{0.0, 0.0});
  for (int c = 0; c < m.cols(); ++c) {
    const cdouble* col = m.col(c);
    cdouble xc = x[c];
    for (int r = 0; r < m.rows(); ++r) y[r] += col[r] * xc;
  }
  return y;
}

// Orthonormal basis of span{columns} via modified Gram-Schmidt with one
// re-orthogonalization pass. Columns whose residual collapses below
// tol * original norm are dropped.
inline std::vector<CVector> orthonormal_basis(const std::vector<CVector>& vectors, double tol = 1e-10) {
  std::vector<CVector> basis;
  for (const auto& v : vectors) {
    CVector r = v;
    double orig = norm(v);
    if (orig == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : basis) {
        cdouble proj = cdot(u, r);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= proj * u[i];
      }
    }
    double rn = norm(r);
    if (rn > tol * orig) {
      for (auto& x : r) x /= rn;
      basis.push_back(std::move(r));
    }
  }
  return basis;
}

// Solves A x = b for Hermitian positive-definite A by Gaussian elimination
// with partial pivoting. Sizes here are tiny (N <= users), so no blocking.
inline CVector solve_linear(CMatrix a, CVector b) {
  int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n) throw shape_error("solve_linear: shape mismatch");
  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      double m = std::abs(a(i, k));
      if (m > best) {
        best = m;
        p = i;
      }
    }
    if (best == 0.0) throw numeric_error("solve_linear: singular matrix");
    if (p != k) {
      for (int c = 0; c < n; ++c) std::swap(a(k, c), a(p, c));
      std::swap(b[k], b[p]);
    }
    for (int i = k + 1; i < n; ++i) {
      cdouble f = a(i, k) / a(k, k);
      a(i, k) = {0.0, 0.0};
      for (int c = k + 1; c < n; ++c) a(i, c) -= f * a(k, c);
      b[i] -= f * b[k];
    }
  }
  CVector x(n);
  for (int i = n - 1; i >= 0; --i) {
    cdouble s = b[i];
    for (int c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace cfisac

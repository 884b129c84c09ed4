#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "thermo_entangle/common.hpp"

namespace thermo_entangle {

/// Small dense real matrix, row-major. Only what the eigensolvers and the
/// CLI reporting need; this library never grows past a few hundred dims.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw DomainError("matrix dimensions must be non-negative");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw DomainError("matrix product dimension mismatch");
    Matrix out(rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const double a = (*this)(i, k);
        if (a == 0.0) continue;
        for (int j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
      }
    return out;
  }

  std::vector<double> column(int j) const {
    std::vector<double> c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  double max_norm() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
  }

 private:
  int rows_, cols_;
  std::vector<double> data_;
};

/// Dense real symmetric matrix with a single stored (lower) triangle, so
/// entry (i,j) and (j,i) are the same memory and symmetry is exact by
/// construction.
class SymMatrix {
 public:
  explicit SymMatrix(int dim) : dim_(dim) {
    if (dim < 1) throw DomainError("symmetric matrix dimension must be >= 1");
    tri_.assign(static_cast<std::size_t>(dim) * (dim + 1) / 2, 0.0);
  }

  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
  }

  static SymMatrix diagonal(const std::vector<double>& d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m.set(i, i, d[i]);
    return m;
  }

  /// Builds from a dense matrix by averaging the two triangles. Intended for
  /// results that are symmetric up to roundoff.
  static SymMatrix from_dense(const Matrix& a) {
    if (a.rows() != a.cols()) throw DomainError("symmetric matrix must be square");
    SymMatrix m(a.rows());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j <= i; ++j) m.set(i, j, 0.5 * (a(i, j) + a(j, i)));
    return m;
  }

  int dim() const { return dim_; }

  double operator()(int i, int j) const { return tri_[index(i, j)]; }
  void set(int i, int j, double v) { tri_[index(i, j)] = v; }

  Matrix to_dense() const {
    Matrix a(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = (*this)(i, j);
    return a;
  }

  double max_norm() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j <= i; ++j) m = std::max(m, std::fabs((*this)(i, j)));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }

 private:
  std::size_t index(int i, int j) const {
    if (j > i) std::swap(i, j);
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
  }

  int dim_;
  std::vector<double> tri_;
};

inline std::vector<double> operator*(const SymMatrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.dim(), 0.0);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace thermo_entangle

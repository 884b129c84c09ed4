#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "thermo_entangle/common.hpp"
#include "thermo_entangle/matrix.hpp"

namespace thermo_entangle {

/// Eigendecomposition of a real symmetric (or symmetric-definite generalized)
/// problem. Eigenvalues ascending; column j of `eigenvectors` pairs with
/// eigenvalues[j]. Ties keep the solver's output order, and each column is
/// sign-fixed so its largest-magnitude component is positive, which makes the
/// output bit-stable across runs for identical input.
struct Spectrum {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

namespace detail {

inline double offdiag_frobenius(const Matrix& a) {
  double s = 0.0;
  for (int p = 0; p < a.rows(); ++p)
    for (int q = p + 1; q < a.cols(); ++q) s += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(s);
}

inline void fix_column_signs(Matrix& v) {
  for (int j = 0; j < v.cols(); ++j) {
    int arg = 0;
    double best = std::fabs(v(0, j));
    for (int i = 1; i < v.rows(); ++i) {
      const double m = std::fabs(v(i, j));
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (v(arg, j) < 0.0)
      for (int i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
  }
}

inline void sort_ascending(std::vector<double>& d, Matrix& v) {
  const int n = static_cast<int>(d.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });
  std::vector<double> ds(n);
  Matrix vs(n, n);
  for (int j = 0; j < n; ++j) {
    ds[j] = d[order[j]];
    for (int i = 0; i < n; ++i) vs(i, j) = v(i, order[j]);
  }
  d = std::move(ds);
  v = std::move(vs);
}

/// Solves L X = B for lower-triangular L (columnwise forward substitution).
inline Matrix forward_solve(const Matrix& l, const Matrix& b) {
  const int n = l.rows();
  Matrix x = b;
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < n; ++i) {
      double s = x(i, j);
      for (int k = 0; k < i; ++k) s -= l(i, k) * x(k, j);
      x(i, j) = s / l(i, i);
    }
  return x;
}

/// Solves L^T X = B for lower-triangular L (columnwise back substitution).
inline Matrix backward_solve_transposed(const Matrix& l, const Matrix& b) {
  const int n = l.rows();
  Matrix x = b;
  for (int j = 0; j < x.cols(); ++j)
    for (int i = n - 1; i >= 0; --i) {
      double s = x(i, j);
      for (int k = i + 1; k < n; ++k) s -= l(k, i) * x(k, j);
      x(i, j) = s / l(i, i);
    }
  return x;
}

}  // namespace detail

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations
/// with a threshold strategy: early sweeps skip entries that are small
/// relative to the current off-diagonal mass, later sweeps take everything.
/// Converged when the off-diagonal Frobenius norm drops below 1e-14 * ||a||_F;
/// the rotation budget is 30 * dim^2.
inline Spectrum eigh_symmetric(const SymMatrix& a) {
  const int n = a.dim();
  Matrix work = a.to_dense();
  Matrix vecs = Matrix::identity(n);
  const double norm_f = a.frobenius_norm();
  const double converged = 1e-14 * norm_f;
  const long budget = 30L * n * n;
  long rotations = 0;

  if (n > 1 && norm_f > 0.0) {
    for (int sweep = 0;; ++sweep) {
      const double off = detail::offdiag_frobenius(work);
      if (off <= converged) break;
      if (rotations >= budget)
        throw ConvergenceError("jacobi eigensolver exhausted its rotation budget", off);
      const double thresh = sweep < 3 ? 0.2 * off / (n * n) : 0.0;

      for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const double apq = work(p, q);
          if (apq == 0.0) continue;
          // an entry that no longer moves the diagonal at double precision
          // can be zeroed outright
          const double tiny = 100.0 * std::fabs(apq);
          if (sweep > 3 && std::fabs(work(p, p)) + tiny == std::fabs(work(p, p)) &&
              std::fabs(work(q, q)) + tiny == std::fabs(work(q, q))) {
            work(p, q) = work(q, p) = 0.0;
            continue;
          }
          if (std::fabs(apq) <= thresh) continue;

          const double theta = (work(q, q) - work(p, p)) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          const double tau = s / (1.0 + c);

          work(p, p) -= t * apq;
          work(q, q) += t * apq;
          work(p, q) = work(q, p) = 0.0;
          for (int k = 0; k < n; ++k) {
            if (k == p || k == q) continue;
            const double akp = work(k, p);
            const double akq = work(k, q);
            work(k, p) = work(p, k) = akp - s * (akq + tau * akp);
            work(k, q) = work(q, k) = akq + s * (akp - tau * akq);
          }
          for (int k = 0; k < n; ++k) {
            const double vkp = vecs(k, p);
            const double vkq = vecs(k, q);
            vecs(k, p) = vkp - s * (vkq + tau * vkp);
            vecs(k, q) = vkq + s * (vkp - tau * vkq);
          }
          ++rotations;
        }
      }
    }
  }

  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = work(i, i);
  detail::sort_ascending(vals, vecs);
  detail::fix_column_signs(vecs);
  return Spectrum{std::move(vals), std::move(vecs)};
}

/// Cholesky factor L with L * L^T = a, L lower triangular with positive
/// diagonal. Throws NotPositiveDefiniteError naming the failing pivot.
inline Matrix cholesky(const SymMatrix& a) {
  const int n = a.dim();
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (int k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (pivot <= 0.0) throw NotPositiveDefiniteError(j, pivot);
    l(j, j) = std::sqrt(pivot);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

/// Symmetric-definite generalized eigenproblem kappa z = w mu z with mu
/// positive definite. Reduced by mu = L L^T to a standard symmetric problem
/// for L^-1 kappa L^-T, then back-transformed z = L^-T y. Returned columns
/// are mu-orthonormal (z^T mu z = 1).
inline Spectrum solve_generalized_eig(const SymMatrix& kappa, const SymMatrix& mu) {
  if (kappa.dim() != mu.dim())
    throw DomainError("generalized eigenproblem: dimension mismatch");
  const Matrix l = cholesky(mu);
  const Matrix y = detail::forward_solve(l, kappa.to_dense());
  const Matrix b = detail::forward_solve(l, y.transposed());
  Spectrum spec = eigh_symmetric(SymMatrix::from_dense(b));
  Matrix z = detail::backward_solve_transposed(l, spec.eigenvectors);
  detail::fix_column_signs(z);
  spec.eigenvectors = std::move(z);
  return spec;
}

/// Determinant as the product of the Jacobi eigenvalues.
inline double determinant(const SymMatrix& a) {
  const Spectrum spec = eigh_symmetric(a);
  double det = 1.0;
  for (double v : spec.eigenvalues) det *= v;
  return det;
}

/// Eliminates one coordinate from a quadratic form: returns the
/// (dim-1)-dimensional matrix a22 - a21 a11^-1 a12 where a11 is the diagonal
/// entry at `block_index`.
inline SymMatrix schur_complement(const SymMatrix& a, int block_index) {
  const int n = a.dim();
  if (block_index < 0 || block_index >= n)
    throw DomainError("schur complement: index out of range");
  if (n < 2) throw DomainError("schur complement: nothing left after elimination");
  const double pivot = a(block_index, block_index);
  if (pivot == 0.0)
    throw DomainError("schur complement: zero pivot at index " + std::to_string(block_index));

  std::vector<int> keep;
  keep.reserve(n - 1);
  for (int i = 0; i < n; ++i)
    if (i != block_index) keep.push_back(i);

  SymMatrix out(n - 1);
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j <= i; ++j)
      out.set(i, j, a(keep[i], keep[j]) - a(keep[i], block_index) * a(block_index, keep[j]) / pivot);
  return out;
}

}  // namespace thermo_entangle

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermo_entangle/common.hpp"
#include "thermo_entangle/hermite.hpp"
#include "thermo_entangle/linalg.hpp"
#include "thermo_entangle/matrix.hpp"

namespace thermo_entangle {

/// Dimensionless entanglement parameters f_1..f_r. Admissible points live
/// strictly inside the unit hypersphere; the quadratic form of the vacuum
/// state degenerates on the boundary, so construction rejects f^2 closer to
/// one than 1e-9.
class ParamVector {
 public:
  explicit ParamVector(std::vector<double> f) : f_(std::move(f)) {
    if (f_.empty()) throw DomainError("ParamVector: need at least one parameter");
    norm_sq_ = 0.0;
    for (double v : f_) {
      if (!std::isfinite(v)) throw DomainError("ParamVector: parameters must be finite");
      norm_sq_ += v * v;
    }
    if (!(norm_sq_ < 1.0 - 1e-9))
      throw DomainError("ParamVector: parameter outside hypersphere (f^2 = " +
                        std::to_string(norm_sq_) + " must stay below 1 - 1e-9)");
  }

  int size() const { return static_cast<int>(f_.size()); }
  const std::vector<double>& values() const { return f_; }
  double operator[](int i) const { return f_[i]; }
  double norm_sq() const { return norm_sq_; }

  /// Relative occupation weight p_j = f_j^2 / f^2 of particle j.
  double occupation_weight(int j) const {
    if (j < 0 || j >= size()) throw DomainError("ParamVector: particle index out of range");
    if (norm_sq_ == 0.0)
      throw DomainError("ParamVector: occupation weights undefined for the zero vector");
    return f_[j] * f_[j] / norm_sq_;
  }

 private:
  std::vector<double> f_;
  double norm_sq_;
};

/// Occupation numbers n_1..n_r of the first r particles.
class MultiIndex {
 public:
  explicit MultiIndex(std::vector<int> n) : n_(std::move(n)) {
    if (n_.empty()) throw DomainError("MultiIndex: need at least one entry");
    total_ = 0;
    for (int v : n_) {
      if (v < 0) throw DomainError("MultiIndex: occupations must be non-negative");
      total_ += v;
    }
  }

  int size() const { return static_cast<int>(n_.size()); }
  const std::vector<int>& values() const { return n_; }
  int operator[](int i) const { return n_[i]; }
  int total() const { return total_; }

 private:
  std::vector<int> n_;
  int total_;
};

/// Quadratic form of the (r+1)-dimensional Gaussian vacuum state. The form
/// is positive definite with unit determinant; both are enforced here so a
/// density normalized as pi^{-(r+1)/2} is actually a probability density.
class VacuumForm {
 public:
  explicit VacuumForm(SymMatrix a) : a_(std::move(a)), r_(a_.dim() - 1) {
    if (a_.dim() < 2) throw DomainError("VacuumForm: form must be at least 2-dimensional");
    const Matrix l = cholesky(a_);  // throws if not positive definite
    double det = 1.0;
    for (int i = 0; i < a_.dim(); ++i) det *= l(i, i) * l(i, i);
    if (std::fabs(det - 1.0) > 1e-9)
      throw ConsistencyError("VacuumForm: determinant " + std::to_string(det) +
                             " deviates from 1 beyond 1e-9");
  }

  const SymMatrix& a() const { return a_; }
  int r() const { return r_; }
  int dim() const { return a_.dim(); }

 private:
  SymMatrix a_;
  int r_;
};

/// Weight lambda_idx = (1-f^2) (f_1^2)^{n_1} ... (f_r^2)^{n_r} n!/(n_1!...n_r!),
/// accumulated in log space so large totals neither overflow nor lose the
/// multinomial factor.
inline double schmidt_weight(const ParamVector& f, const MultiIndex& idx) {
  if (idx.size() != f.size())
    throw DomainError("schmidt_weight: occupation length must match parameter length");
  const int r = f.size();
  double log_w = std::log1p(-f.norm_sq());
  double log_multinomial = std::lgamma(double(idx.total()) + 1.0);
  for (int i = 0; i < r; ++i) {
    const int ni = idx[i];
    if (ni == 0) continue;
    const double fi2 = f[i] * f[i];
    if (fi2 == 0.0) return 0.0;
    log_w += ni * std::log(fi2);
    log_multinomial -= std::lgamma(double(ni) + 1.0);
  }
  return std::exp(log_w + log_multinomial);
}

/// Decomposition coefficient c_idx: positive root of the weight times the
/// sign of prod f_i^{n_i}. Coincides with the all-positive-parameter
/// convention whenever every f_i > 0.
inline double schmidt_coefficient(const ParamVector& f, const MultiIndex& idx) {
  const double w = schmidt_weight(f, idx);
  if (w == 0.0) return 0.0;
  int sign = 1;
  for (int i = 0; i < f.size(); ++i) {
    if (f[i] < 0.0 && idx[i] % 2 == 1) sign = -sign;
  }
  return sign * std::sqrt(w);
}

/// Vacuum-form matrix:
///   A_ij      = delta_ij + 2 f_i f_j / (1-f^2)   (i, j <= r)
///   A_{i,r+1} = -2 f_i / (1-f^2)
///   A_{r+1,r+1} = (1+f^2) / (1-f^2)
inline VacuumForm build_matrix_a(const ParamVector& f) {
  const int r = f.size();
  const double om = 1.0 - f.norm_sq();
  SymMatrix a(r + 1);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double base = (i == j) ? 1.0 : 0.0;
      a.set(i, j, base + 2.0 * f[i] * f[j] / om);
    }
  }
  for (int i = 0; i < r; ++i) a.set(r, i, -2.0 * f[i] / om);
  a.set(r, r, (1.0 + f.norm_sq()) / om);
  return VacuumForm(std::move(a));
}

struct AnalyticSpectrum {
  double lambda_max;
  double lambda_min;
  std::vector<double> v_max;
  std::vector<double> v_min;
};

/// Closed-form extreme eigenpairs of the vacuum form:
///   lambda_max = (1+|f|)^2/(1-f^2), lambda_min = (1-|f|)^2/(1-f^2),
/// with eigenvectors (-f_i/sqrt(2 f^2), ..., 1/sqrt 2) and its sign-flipped
/// partner. The remaining r-1 eigenvalues are exactly one.
inline AnalyticSpectrum analytic_spectrum(const ParamVector& f) {
  const double f2 = f.norm_sq();
  if (f2 == 0.0)
    throw DomainError("analytic_spectrum: eigenvector directions undefined at f = 0");
  const int r = f.size();
  const double root = std::sqrt(f2);
  AnalyticSpectrum s;
  s.lambda_max = (1.0 + root) * (1.0 + root) / (1.0 - f2);
  s.lambda_min = (1.0 - root) * (1.0 - root) / (1.0 - f2);
  s.v_max.resize(r + 1);
  s.v_min.resize(r + 1);
  const double scale = 1.0 / std::sqrt(2.0 * f2);
  for (int i = 0; i < r; ++i) {
    s.v_max[i] = -f[i] * scale;
    s.v_min[i] = f[i] * scale;
  }
  s.v_max[r] = 1.0 / std::sqrt(2.0);
  s.v_min[r] = 1.0 / std::sqrt(2.0);
  return s;
}

/// Covariance of the vacuum state: Sigma = A^{-1}/2, assembled from the
/// eigendecomposition of A.
inline SymMatrix covariance(const VacuumForm& form) {
  const int n = form.dim();
  const Spectrum spec = eigh_symmetric(form.a());
  SymMatrix sigma(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        acc += spec.eigenvectors(i, k) * spec.eigenvectors(j, k) / spec.eigenvalues[k];
      sigma.set(i, j, 0.5 * acc);
    }
  }
  return sigma;
}

/// Probability density of the vacuum state: pi^{-(r+1)/2} exp(-x^T A x).
/// The prefactor is exact because the form has unit determinant.
inline double gaussian_density(const VacuumForm& form, std::span<const double> x) {
  const int n = form.dim();
  if (static_cast<int>(x.size()) != n)
    throw DomainError("gaussian_density: point dimension must be r + 1");
  double q = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) throw DomainError("gaussian_density: point must be finite");
    for (int j = 0; j < n; ++j) q += x[i] * form.a()(i, j) * x[j];
  }
  return std::pow(M_PI, -0.5 * n) * std::exp(-q);
}

/// Partial sum of the entangled wavefunction over all occupations with total
/// at most n_max:
///   psi(x) = sum c_{n_1..n_r} psi_{n_1}(x_1) ... psi_{n_r}(x_r)
///            psi_{n_1+..+n_r}(x_{r+1}).
/// Eigenfunction values are tabulated once per coordinate.
inline double truncated_wavefunction(const ParamVector& f, std::span<const double> x,
                                     int n_max) {
  constexpr int kMaxTruncation = 60;
  const int r = f.size();
  if (static_cast<int>(x.size()) != r + 1)
    throw DomainError("truncated_wavefunction: point dimension must be r + 1");
  if (n_max < 0 || n_max > kMaxTruncation)
    throw DomainError("truncated_wavefunction: truncation order must lie in [0, " +
                      std::to_string(kMaxTruncation) + "]");

  std::vector<std::vector<double>> psi(r + 1, std::vector<double>(n_max + 1));
  for (int j = 0; j <= r; ++j)
    for (int k = 0; k <= n_max; ++k) psi[j][k] = osc_eigenfunction(k, x[j]);

  double sum = 0.0;
  for (int total = 0; total <= n_max; ++total) {
    std::vector<int> occ = first_composition(total, r);
    do {
      const double c = schmidt_coefficient(f, MultiIndex(occ));
      if (c != 0.0) {
        double term = c * psi[r][total];
        for (int j = 0; j < r; ++j) term *= psi[j][occ[j]];
        sum += term;
      }
    } while (next_composition(occ));
  }
  return sum;
}

/// Smallest truncation order whose geometric weight tail (f^2)^{n_max+1}
/// drops below 1e-10, capped at the evaluation limit of 60.
inline int default_truncation(const ParamVector& f) {
  constexpr double kTailBound = 1e-10;
  constexpr int kCap = 60;
  const double f2 = f.norm_sq();
  if (f2 == 0.0) return 0;
  int n = 0;
  double tail = f2;
  while (tail >= kTailBound && n < kCap) {
    tail *= f2;
    ++n;
  }
  return n;
}

}  // namespace thermo_entangle

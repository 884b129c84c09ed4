#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "thermo_entangle/common.hpp"

namespace thermo_entangle {

/// Physicists' Hermite polynomial H_k(x) by the raw three-term recurrence
/// H_{k+1} = 2x H_k - 2k H_{k-1}. Magnitudes explode with k; anything past
/// the cap should go through osc_eigenfunction instead, which stays bounded.
inline double hermite_poly(int k, double x) {
  constexpr int kMaxRawOrder = 300;
  if (k < 0) throw DomainError("hermite_poly: order must be non-negative");
  if (k > kMaxRawOrder)
    throw DomainError("hermite_poly: order above " + std::to_string(kMaxRawOrder) +
                      "; use osc_eigenfunction for large orders");
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - 2.0 * j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Orthonormal oscillator eigenfunction
///   psi_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x) exp(-x^2/2),
/// evaluated by the normalized recurrence
///   psi_{k+1} = x sqrt(2/(k+1)) psi_k - sqrt(k/(k+1)) psi_{k-1},
/// which never forms 2^k or k! and keeps every intermediate bounded.
inline double osc_eigenfunction(int k, double x) {
  if (k < 0) throw DomainError("osc_eigenfunction: order must be non-negative");
  const double psi0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (k == 0) return psi0;
  double prev = psi0;
  double cur = std::sqrt(2.0) * x * psi0;
  for (int j = 1; j < k; ++j) {
    const double next = x * std::sqrt(2.0 / (j + 1)) * cur - std::sqrt(double(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Closed form of the bilinear Hermite generating function
///   sum_k x^k H_k(y) H_k(z) / (2^k k!)
///     = (1-x^2)^{-1/2} exp((2xyz - (y^2+z^2)x^2) / (1-x^2)),
/// valid for |x| < 1.
inline double mehler_kernel(double x, double y, double z) {
  if (!(std::fabs(x) < 1.0))
    throw DomainError("mehler_kernel: first argument must satisfy |x| < 1");
  const double om = 1.0 - x * x;
  return std::exp((2.0 * x * y * z - (y * y + z * z) * x * x) / om) / std::sqrt(om);
}

/// Truncated series of the same kernel, summed through normalized Hermite
/// values h_k = H_k / sqrt(2^k k!) so that terms stay bounded at any order.
/// This is the reference route the closed form is checked against.
inline double mehler_series(double x, double y, double z, int terms) {
  if (terms < 1) throw DomainError("mehler_series: need at least one term");
  double hy_prev = 0.0, hy = 1.0;
  double hz_prev = 0.0, hz = 1.0;
  double xk = 1.0;
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    sum += xk * hy * hz;
    xk *= x;
    const double hy_next = y * std::sqrt(2.0 / (k + 1)) * hy - std::sqrt(double(k) / (k + 1)) * hy_prev;
    const double hz_next = z * std::sqrt(2.0 / (k + 1)) * hz - std::sqrt(double(k) / (k + 1)) * hz_prev;
    hy_prev = hy;
    hy = hy_next;
    hz_prev = hz;
    hz = hz_next;
  }
  return sum;
}

/// Advances a composition of fixed total in place, descending-lexicographic,
/// in the style of std::next_permutation. The first composition of n into r
/// parts is (n, 0, ..., 0); returns false once (0, ..., 0, n) has been
/// consumed. Recursion-free.
inline bool next_composition(std::vector<int>& c) {
  const int r = static_cast<int>(c.size());
  if (r <= 1) return false;
  const int tail = c[r - 1];
  int i = r - 2;
  while (i >= 0 && c[i] == 0) --i;
  if (i < 0) return false;
  c[i] -= 1;
  c[r - 1] = 0;
  c[i + 1] = tail + 1;
  return true;
}

inline std::vector<int> first_composition(int total, int parts) {
  if (parts < 1) throw DomainError("composition: need at least one part");
  if (total < 0) throw DomainError("composition: total must be non-negative");
  std::vector<int> c(parts, 0);
  c[0] = total;
  return c;
}

/// |LHS - RHS| of the Hermite multinomial summation identity
///   (f^2)^{n/2}/n! H_n(sum f_k x_k / sqrt(f^2))
///     = sum_{n_1+...+n_r=n} prod_k f_k^{n_k} H_{n_k}(x_k) / n_k!,
/// with the right side enumerated composition by composition.
inline double hermite_sum_residual(std::span<const double> f, std::span<const double> coords,
                                   int n) {
  constexpr int kMaxOrder = 20;  // factorials stay well inside double range
  if (n < 0 || n > kMaxOrder)
    throw DomainError("hermite_sum_residual: order must lie in [0, 20]");
  if (f.size() != coords.size() || f.empty())
    throw DomainError("hermite_sum_residual: parameter and coordinate lengths must match");
  const int r = static_cast<int>(f.size());

  double f2 = 0.0, proj = 0.0;
  for (int k = 0; k < r; ++k) {
    f2 += f[k] * f[k];
    proj += f[k] * coords[k];
  }

  double lhs;
  if (n == 0) {
    lhs = 1.0;
  } else if (f2 == 0.0) {
    lhs = 0.0;
  } else {
    double fact = 1.0;
    for (int j = 2; j <= n; ++j) fact *= j;
    lhs = std::pow(f2, 0.5 * n) / fact * hermite_poly(n, proj / std::sqrt(f2));
  }

  double rhs = 0.0;
  std::vector<int> idx = first_composition(n, r);
  do {
    double term = 1.0;
    for (int k = 0; k < r; ++k) {
      const int nk = idx[k];
      if (nk == 0) continue;
      double fact = 1.0;
      for (int j = 2; j <= nk; ++j) fact *= j;
      term *= std::pow(f[k], nk) * hermite_poly(nk, coords[k]) / fact;
    }
    rhs += term;
  } while (next_composition(idx));

  return std::fabs(lhs - rhs);
}

}  // namespace thermo_entangle

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "thermo_entangle/common.hpp"
#include "thermo_entangle/linalg.hpp"
#include "thermo_entangle/matrix.hpp"
#include "thermo_entangle/parallel.hpp"

namespace thermo_entangle {

/// r identical oscillators (mass m, rigidity k) and one detector oscillator
/// (mass M, rigidity chi), all riding on a partition of mass m0.
struct OscillatorSystem {
  int r;
  double m;
  double m0;
  double M;
  double k;
  double chi;

  OscillatorSystem(int r_, double m_, double m0_, double M_, double k_, double chi_)
      : r(r_), m(m_), m0(m0_), M(M_), k(k_), chi(chi_) {
    if (r < 1) throw DomainError("OscillatorSystem: need at least one oscillator");
    if (!(m > 0.0) || !(m0 > 0.0) || !(M > 0.0))
      throw DomainError("OscillatorSystem: masses must be positive");
    if (!(k > 0.0)) throw DomainError("OscillatorSystem: oscillator rigidity must be positive");
    if (chi < 0.0) throw DomainError("OscillatorSystem: detector rigidity must be non-negative");
  }

  double total_mass() const { return M + r * m + m0; }
};

/// Kinetic form of the unreduced system in coordinates (x0, z_1..z_{r+1}),
/// where x0 is the partition position and the z are displacements relative
/// to it. Eliminating x0 at zero total momentum reproduces mass_matrix; the
/// tests use that as an independent derivation route.
inline SymMatrix full_kinetic_matrix(const OscillatorSystem& sys) {
  const int n = sys.r + 2;
  SymMatrix kinetic(n);
  kinetic.set(0, 0, sys.m0 + sys.r * sys.m + sys.M);
  for (int i = 1; i <= sys.r; ++i) {
    kinetic.set(i, 0, sys.m);
    kinetic.set(i, i, sys.m);
  }
  kinetic.set(n - 1, 0, -sys.M);
  kinetic.set(n - 1, n - 1, sys.M);
  return kinetic;
}

/// Reduced (r+1)-dimensional mass matrix with T = M + rm + m0:
/// diagonal m(1 - m/T) over the first r rows, off-diagonal -m^2/T,
/// detector coupling column Mm/T, and corner M(rm + m0)/T.
inline SymMatrix mass_matrix(const OscillatorSystem& sys) {
  const double T = sys.total_mass();
  const int n = sys.r + 1;
  SymMatrix mu(n);
  for (int i = 0; i < sys.r; ++i) {
    for (int j = 0; j < i; ++j) mu.set(i, j, -sys.m * sys.m / T);
    mu.set(i, i, sys.m * (1.0 - sys.m / T));
  }
  for (int i = 0; i < sys.r; ++i) mu.set(n - 1, i, sys.M * sys.m / T);
  mu.set(n - 1, n - 1, sys.M * (sys.r * sys.m + sys.m0) / T);
  return mu;
}

/// Rigidity matrix: diag(k, ..., k, chi).
inline SymMatrix stiffness_matrix(const OscillatorSystem& sys) {
  std::vector<double> diag(sys.r + 1, sys.k);
  diag.back() = sys.chi;
  return SymMatrix::diagonal(diag);
}

struct SecularCoefficients {
  double a;
  double b;
  double c;
};

/// Coefficients of the dimensionless secular quadratic a lambda^2 + b lambda
/// + c = 0 satisfied by the two coupled modes (lambda = omega^2 m/k):
///   a = (rm+m0)/m - Mr/(M+m0)
///   b = -(M+rm+m0) (chi/(kM) + (rm+m0)/(m(M+m0)))
///   c = (chi/k) (M+rm+m0)^2 / (M(M+m0))
inline SecularCoefficients secular_coefficients(const OscillatorSystem& sys) {
  const double T = sys.total_mass();
  const double rm_m0 = sys.r * sys.m + sys.m0;
  SecularCoefficients out;
  out.a = rm_m0 / sys.m - sys.M * sys.r / (sys.M + sys.m0);
  out.b = -T * (sys.chi / (sys.k * sys.M) + rm_m0 / (sys.m * (sys.M + sys.m0)));
  out.c = (sys.chi / sys.k) * T * T / (sys.M * (sys.M + sys.m0));
  return out;
}

/// Both secular roots, descending, via the cancellation-free quadratic
/// formula (larger-magnitude root first, partner as c/(a lambda)).
inline std::pair<double, double> coupled_lambdas(const OscillatorSystem& sys) {
  const SecularCoefficients s = secular_coefficients(sys);
  double disc = s.b * s.b - 4.0 * s.a * s.c;
  if (disc < -1e-12)
    throw ConsistencyError("coupled_lambdas: secular discriminant " + std::to_string(disc) +
                           " is negative beyond tolerance");
  if (disc < 0.0) disc = 0.0;
  const double root = std::sqrt(disc);
  const double q = (s.b < 0.0) ? 0.5 * (-s.b + root) : 0.5 * (-s.b - root);
  double lambda1 = q / s.a;
  double lambda2 = (q == 0.0) ? 0.0 : s.c / q;
  if (lambda1 < lambda2) std::swap(lambda1, lambda2);
  return {lambda1, lambda2};
}

/// Detector-to-oscillator displacement ratio of a coupled mode:
///   z_{r+1}/z_1 = ((M+rm+m0)/lambda - (M+m0)) / M.
inline double displacement_ratio(const OscillatorSystem& sys, double lambda) {
  if (lambda == 0.0)
    throw DomainError("displacement_ratio: soft mode (lambda = 0, chi = 0) has no finite ratio");
  return (sys.total_mass() / lambda - (sys.M + sys.m0)) / sys.M;
}

/// Normal modes of the reduced system. lambdas are dimensionless omega^2 m/k
/// in descending order; mode column s is mass-orthonormal (z^T mu z = 1), so
/// modal masses are unity and modal rigidities equal omega^2.
struct ModeSet {
  std::vector<double> lambdas;
  Matrix modes;
  std::vector<double> modal_masses;
  std::vector<double> modal_rigidities;
};

inline ModeSet normal_modes(const OscillatorSystem& sys) {
  const SymMatrix mu = mass_matrix(sys);
  const SymMatrix kappa = stiffness_matrix(sys);
  const Spectrum spec = solve_generalized_eig(kappa, mu);
  const int n = sys.r + 1;

  ModeSet set;
  set.lambdas.resize(n);
  set.modes = Matrix(n, n);
  set.modal_masses.resize(n);
  set.modal_rigidities.resize(n);
  for (int s = 0; s < n; ++s) {
    const int src = n - 1 - s;  // descending
    set.lambdas[s] = spec.eigenvalues[src] * sys.m / sys.k;
    for (int i = 0; i < n; ++i) set.modes(i, s) = spec.eigenvectors(i, src);
  }
  for (int s = 0; s < n; ++s) {
    const std::vector<double> zs = set.modes.column(s);
    set.modal_masses[s] = dot(zs, mu * zs);
    set.modal_rigidities[s] = dot(zs, kappa * zs);
  }

  // mutual orthogonality in both metrics
  const double scale_mu = mu.max_norm();
  const double scale_kappa = std::max(kappa.max_norm(), 1.0);
  for (int s = 0; s < n; ++s) {
    const std::vector<double> zs = set.modes.column(s);
    const std::vector<double> mu_zs = mu * zs;
    const std::vector<double> kappa_zs = kappa * zs;
    for (int j = s + 1; j < n; ++j) {
      const std::vector<double> zj = set.modes.column(j);
      if (std::fabs(dot(zj, mu_zs)) > 1e-9 * scale_mu ||
          std::fabs(dot(zj, kappa_zs)) > 1e-9 * scale_kappa)
        throw ConsistencyError("normal_modes: modes are not mutually orthogonal");
    }
  }
  return set;
}

/// Vacuum-form matrix of the coupled system assembled from its modes:
/// A = V1 sqrt(D1) V1^T with D1 = diag(lambda) and V1 the mode columns
/// rescaled to be orthonormal in the mass metric expressed in units of m
/// (V1 = sqrt(m) Z). With that convention the decoupled equal-mass limit
/// gives A = identity, the standard single-oscillator ground state.
inline SymMatrix vacuum_matrix(const OscillatorSystem& sys) {
  const ModeSet set = normal_modes(sys);
  const int n = sys.r + 1;
  for (double lambda : set.lambdas) {
    if (lambda <= 1e-12)
      throw DomainError("vacuum_matrix: non-positive mode (lambda = " +
                        std::to_string(lambda) + "); requires chi > 0");
  }
  SymMatrix a(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (int s = 0; s < n; ++s)
        acc += std::sqrt(set.lambdas[s]) * set.modes(i, s) * set.modes(j, s);
      a.set(i, j, sys.m * acc);
    }
  }
  return a;
}

/// Entanglement temperature of the chi -> 0 regime as a function of the
/// mass ratio xi = rm/m0:
///   theta = hbar_omega / ln( ((1+xi)^{3/2} + 1) / ((1+xi)^{3/2} - 1) ).
inline double temperature_from_xi(double xi, double hbar_omega = 1.0) {
  if (!(xi > 0.0)) throw DomainError("temperature_from_xi: mass ratio must be positive");
  if (!(hbar_omega > 0.0))
    throw DomainError("temperature_from_xi: energy unit must be positive");
  const double s = std::pow(1.0 + xi, 1.5);
  return hbar_omega / std::log((s + 1.0) / (s - 1.0));
}

/// Companion Boltzmann weight g = exp(-hbar_omega/theta) = (s-1)/(s+1),
/// s = (1+xi)^{3/2}; feeds ThermalParams::from_g.
inline double g_from_xi(double xi) {
  if (!(xi > 0.0)) throw DomainError("g_from_xi: mass ratio must be positive");
  const double s = std::pow(1.0 + xi, 1.5);
  return (s - 1.0) / (s + 1.0);
}

struct Fig2Row {
  double xi;
  double theta;
  double mean_energy;
};

/// Temperature and mean excitation energy across a grid of mass ratios:
/// theta from the closed form above, epsilon = hbar_omega/(exp(hbar_omega/
/// theta) - 1). Grid points are independent and evaluated in parallel with
/// deterministic ordering.
inline std::vector<Fig2Row> fig2_curve(const std::vector<double>& xi_grid,
                                       double hbar_omega = 1.0) {
  for (double xi : xi_grid)
    if (!(xi > 0.0)) throw DomainError("fig2_curve: mass ratios must be positive");
  std::vector<Fig2Row> rows(xi_grid.size());
  parallel_for(0, static_cast<std::int64_t>(xi_grid.size()), [&](std::int64_t i) {
    const double xi = xi_grid[i];
    const double theta = temperature_from_xi(xi, hbar_omega);
    const double mean = hbar_omega / std::expm1(hbar_omega / theta);
    rows[i] = Fig2Row{xi, theta, mean};
  });
  return rows;
}

}  // namespace thermo_entangle

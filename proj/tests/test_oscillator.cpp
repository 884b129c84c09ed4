#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "thermo_entangle/linalg.hpp"
#include "thermo_entangle/oscillator.hpp"

namespace te = thermo_entangle;

namespace {

const te::OscillatorSystem kUnitSystem(1, 1.0, 1.0, 1.0, 1.0, 1.0);

te::OscillatorSystem random_system(std::mt19937_64& gen, int max_r = 8) {
  std::uniform_int_distribution<int> ur(1, max_r);
  std::uniform_real_distribution<double> um(0.3, 3.0);
  std::uniform_real_distribution<double> uchi(0.05, 2.0);
  return te::OscillatorSystem(ur(gen), um(gen), um(gen), um(gen), um(gen), uchi(gen));
}

// expected descending mode spectrum: both secular roots plus r-1 unit modes
std::vector<double> expected_lambdas(const te::OscillatorSystem& sys) {
  const auto [l1, l2] = te::coupled_lambdas(sys);
  std::vector<double> expected(sys.r + 1, 1.0);
  expected.front() = l1;
  expected.back() = l2;
  std::sort(expected.begin(), expected.end(), std::greater<double>());
  return expected;
}

}  // namespace

TEST_CASE("OscillatorSystem validation") {
  CHECK_THROWS_AS(te::OscillatorSystem(0, 1, 1, 1, 1, 1), te::DomainError);
  CHECK_THROWS_AS(te::OscillatorSystem(1, 0, 1, 1, 1, 1), te::DomainError);
  CHECK_THROWS_AS(te::OscillatorSystem(1, 1, -2, 1, 1, 1), te::DomainError);
  CHECK_THROWS_AS(te::OscillatorSystem(1, 1, 1, 0, 1, 1), te::DomainError);
  CHECK_THROWS_AS(te::OscillatorSystem(1, 1, 1, 1, 0, 1), te::DomainError);
  CHECK_THROWS_AS(te::OscillatorSystem(1, 1, 1, 1, 1, -0.5), te::DomainError);
  CHECK_NOTHROW(te::OscillatorSystem(3, 1, 1, 1, 1, 0.0));
}

TEST_CASE("mass_matrix closed form and decoupling limit") {
  const te::SymMatrix mu = te::mass_matrix(kUnitSystem);
  CHECK(mu(0, 0) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(mu(0, 1) == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(mu(1, 1) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));

  const te::OscillatorSystem heavy(3, 0.7, 1e9, 2.5, 1.2, 0.4);
  const te::SymMatrix heavy_mu = te::mass_matrix(heavy);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double expected = (i != j) ? 0.0 : (i < 3 ? heavy.m : heavy.M);
      CHECK(std::fabs(heavy_mu(i, j) - expected) <= 1e-6 * heavy.M);
    }
  }
}

TEST_CASE("mass_matrix equals the reduced kinetic form") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 60; ++trial) {
    const te::OscillatorSystem sys = random_system(gen);
    const te::SymMatrix direct = te::mass_matrix(sys);
    const te::SymMatrix reduced = te::schur_complement(te::full_kinetic_matrix(sys), 0);
    REQUIRE(reduced.dim() == sys.r + 1);
    for (int i = 0; i <= sys.r; ++i)
      for (int j = 0; j <= sys.r; ++j)
        CHECK(std::fabs(direct(i, j) - reduced(i, j)) <= 1e-12 * sys.total_mass());
  }
}

TEST_CASE("stiffness_matrix diagonal") {
  const te::OscillatorSystem sys(2, 1.0, 1.0, 1.0, 1.0, 2.0);
  const te::SymMatrix kappa = te::stiffness_matrix(sys);
  CHECK(kappa(0, 0) == 1.0);
  CHECK(kappa(1, 1) == 1.0);
  CHECK(kappa(2, 2) == 2.0);
  CHECK(kappa(0, 1) == 0.0);
  CHECK(kappa(0, 2) == 0.0);

  const te::OscillatorSystem soft(2, 1.0, 1.0, 1.0, 1.0, 0.0);
  CHECK(te::stiffness_matrix(soft)(2, 2) == 0.0);
}

TEST_CASE("secular_coefficients") {
  const te::SecularCoefficients s = te::secular_coefficients(kUnitSystem);
  CHECK(s.a == Catch::Approx(1.5).margin(1e-12));
  CHECK(s.b == Catch::Approx(-6.0).margin(1e-12));
  CHECK(s.c == Catch::Approx(4.5).margin(1e-12));

  const te::OscillatorSystem soft(3, 0.8, 1.5, 2.0, 1.3, 0.0);
  CHECK(te::secular_coefficients(soft).c == 0.0);

  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 100; ++trial) {
    const te::OscillatorSystem sys = random_system(gen);
    CHECK(te::secular_coefficients(sys).a > 0.0);
  }
}

TEST_CASE("coupled_lambdas roots and limits") {
  const auto [l1, l2] = te::coupled_lambdas(kUnitSystem);
  CHECK(l1 == Catch::Approx(3.0).margin(1e-12));
  CHECK(l2 == Catch::Approx(1.0).margin(1e-12));

  // vanishing detector rigidity: hard mode 1 + rm/m0, soft mode collapses
  for (double M : {1.0, 5.0}) {
    const te::OscillatorSystem nearly_free(1, 1.0, 1.0, M, 1.0, 1e-8);
    const auto [h1, h2] = te::coupled_lambdas(nearly_free);
    CHECK(std::fabs(h1 - 2.0) <= 1e-6);
    CHECK(h2 <= 1e-6);
    CHECK(h2 > 0.0);
  }
  const te::OscillatorSystem free_exact(2, 1.0, 0.5, 1.0, 1.0, 0.0);
  const auto [f1, f2] = te::coupled_lambdas(free_exact);
  CHECK(f1 == Catch::Approx(1.0 + 2.0 / 0.5).epsilon(1e-12));
  CHECK(f2 == 0.0);

  // infinitely heavy partition: independent oscillator and detector modes
  const te::OscillatorSystem pinned(3, 1.0, 1e9, 2.0, 1.0, 0.5);
  const auto [p1, p2] = te::coupled_lambdas(pinned);
  CHECK(std::fabs(p1 - 1.0) <= 1e-6);
  CHECK(std::fabs(p2 - 0.25) <= 1e-6);

  // first-order convergence rate in the small parameter
  const auto rate = [](double eps) {
    const te::OscillatorSystem sys(1, 1.0, 1.0, 1.0, 1.0, eps);
    return std::fabs(te::coupled_lambdas(sys).first - 2.0);
  };
  CHECK(rate(1e-4) / rate(1e-3) == Catch::Approx(0.1).epsilon(0.1));
}

TEST_CASE("displacement_ratio of the coupled modes") {
  CHECK(te::displacement_ratio(kUnitSystem, 3.0) == Catch::Approx(-1.0).margin(1e-12));
  CHECK(te::displacement_ratio(kUnitSystem, 1.0) == Catch::Approx(1.0).margin(1e-12));
  CHECK_THROWS_AS(te::displacement_ratio(kUnitSystem, 0.0), te::DomainError);

  // (1, ..., 1, ratio) solves the generalized eigen-equation
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 40; ++trial) {
    const te::OscillatorSystem sys = random_system(gen);
    const te::SymMatrix mu = te::mass_matrix(sys);
    const te::SymMatrix kappa = te::stiffness_matrix(sys);
    const auto [l1, l2] = te::coupled_lambdas(sys);
    for (double lambda : {l1, l2}) {
      std::vector<double> v(sys.r + 1, 1.0);
      v.back() = te::displacement_ratio(sys, lambda);
      const double omega_sq = lambda * sys.k / sys.m;
      const std::vector<double> lhs = kappa * v;
      const std::vector<double> rhs = mu * v;
      const double scale = std::max(1.0, te::max_abs(lhs));
      for (int i = 0; i <= sys.r; ++i)
        CHECK(std::fabs(lhs[i] - omega_sq * rhs[i]) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("normal_modes spectrum matches the secular roots") {
  {
    const te::ModeSet set = te::normal_modes(kUnitSystem);
    REQUIRE(set.lambdas.size() == 2);
    CHECK(std::fabs(set.lambdas[0] - 3.0) <= 1e-9);
    CHECK(std::fabs(set.lambdas[1] - 1.0) <= 1e-9);
  }
  {
    const te::OscillatorSystem sys(4, 1.0, 2.0, 3.0, 1.0, 0.5);
    const te::ModeSet set = te::normal_modes(sys);
    REQUIRE(set.lambdas.size() == 5);
    int unit_count = 0;
    for (double l : set.lambdas)
      if (std::fabs(l - 1.0) <= 1e-9) ++unit_count;
    CHECK(unit_count == 3);
    CHECK(set.lambdas[0] == Catch::Approx(3.180883).margin(1e-3));
    CHECK(set.lambdas[4] == Catch::Approx(0.235783).margin(1e-3));
  }

  std::mt19937_64 gen(44);
  for (int trial = 0; trial < 60; ++trial) {
    const te::OscillatorSystem sys = random_system(gen);
    const te::ModeSet set = te::normal_modes(sys);
    const std::vector<double> expected = expected_lambdas(sys);
    REQUIRE(set.lambdas.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      INFO("trial=" << trial << " mode " << i);
      CHECK(std::fabs(set.lambdas[i] - expected[i]) <= 1e-9 * std::max(1.0, expected[i]));
    }
  }
}

TEST_CASE("normal_modes modal quantities and orthogonality") {
  std::mt19937_64 gen(45);
  for (int trial = 0; trial < 25; ++trial) {
    const te::OscillatorSystem sys = random_system(gen, 6);
    const te::ModeSet set = te::normal_modes(sys);
    const te::SymMatrix mu = te::mass_matrix(sys);
    const te::SymMatrix kappa = te::stiffness_matrix(sys);
    const int n = sys.r + 1;
    for (int s = 0; s < n; ++s) {
      CHECK(std::fabs(set.modal_masses[s] - 1.0) <= 1e-9);
      const double omega_sq = set.lambdas[s] * sys.k / sys.m;
      CHECK(std::fabs(set.modal_rigidities[s] / set.modal_masses[s] - omega_sq) <=
            1e-9 * std::max(1.0, omega_sq));
      CHECK(std::fabs(set.modal_rigidities[s] / set.modal_masses[s] * sys.m / sys.k -
                      set.lambdas[s]) <= 1e-9 * std::max(1.0, set.lambdas[s]));
    }
    for (int s = 0; s < n; ++s) {
      const std::vector<double> zs = set.modes.column(s);
      for (int j = s + 1; j < n; ++j) {
        const std::vector<double> zj = set.modes.column(j);
        CHECK(std::fabs(te::dot(zs, mu * zj)) <= 1e-9 * mu.max_norm());
        CHECK(std::fabs(te::dot(zs, kappa * zj)) <= 1e-9 * std::max(1.0, kappa.max_norm()));
      }
    }
  }
}

TEST_CASE("coupled mode shapes are uniform with the analytic detector ratio") {
  std::mt19937_64 gen(46);
  int accepted = 0;
  while (accepted < 40) {
    const te::OscillatorSystem sys = random_system(gen);
    const auto [l1, l2] = te::coupled_lambdas(sys);
    // keep draws whose coupled modes are clearly separated from the unit
    // modes and from each other, so the eigenvectors are unambiguous
    if (std::fabs(l1 - 1.0) < 1e-3 || std::fabs(l2 - 1.0) < 1e-3 ||
        std::fabs(l1 - l2) < 1e-3)
      continue;
    ++accepted;

    const te::ModeSet set = te::normal_modes(sys);
    for (double lambda : {l1, l2}) {
      int pos = -1;
      for (std::size_t s = 0; s < set.lambdas.size(); ++s)
        if (std::fabs(set.lambdas[s] - lambda) <= 1e-6 * std::max(1.0, lambda)) pos = int(s);
      REQUIRE(pos >= 0);
      const std::vector<double> z = set.modes.column(pos);
      double zmax = 0.0;
      for (double v : z) zmax = std::max(zmax, std::fabs(v));
      for (int i = 1; i < sys.r; ++i) CHECK(std::fabs(z[i] - z[0]) <= 1e-9 * zmax);
      const double ratio = te::displacement_ratio(sys, lambda);
      CHECK(std::fabs(z[sys.r] - ratio * z[0]) <= 1e-9 * zmax * std::max(1.0, std::fabs(ratio)));
    }
  }
}

TEST_CASE("vacuum_matrix convention and limits") {
  // decoupled equal-mass limit: standard ground state
  {
    const te::OscillatorSystem decoupled(3, 1.0, 1e9, 1.0, 1.0, 1.0);
    const te::SymMatrix a = te::vacuum_matrix(decoupled);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(std::fabs(a(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-5);
  }

  // mass-weighted spectral mapping: eig(S A S) = sqrt(lambda), S = (mu/m)^{1/2}
  for (const te::OscillatorSystem& sys :
       {kUnitSystem, te::OscillatorSystem(2, 0.7, 1.3, 2.1, 1.1, 0.8)}) {
    const te::SymMatrix a = te::vacuum_matrix(sys);
    const int n = sys.r + 1;

    // positive definite and exactly symmetric by construction
    const te::Spectrum direct = te::eigh_symmetric(a);
    for (double ev : direct.eigenvalues) CHECK(ev > 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(a(i, j) == a(j, i));

    const te::SymMatrix mu = te::mass_matrix(sys);
    te::SymMatrix mu_scaled(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) mu_scaled.set(i, j, mu(i, j) / sys.m);
    const te::Spectrum mu_spec = te::eigh_symmetric(mu_scaled);
    te::Matrix sqrt_mu(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int t = 0; t < n; ++t)
          acc += mu_spec.eigenvectors(i, t) * std::sqrt(mu_spec.eigenvalues[t]) *
                 mu_spec.eigenvectors(j, t);
        sqrt_mu(i, j) = acc;
      }
    }
    te::SymMatrix weighted(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        double acc = 0.0;
        for (int s = 0; s < n; ++s)
          for (int t = 0; t < n; ++t) acc += sqrt_mu(i, s) * a(s, t) * sqrt_mu(t, j);
        weighted.set(i, j, acc);
      }
    }
    const te::Spectrum mapped = te::eigh_symmetric(weighted);
    const te::ModeSet set = te::normal_modes(sys);
    for (int s = 0; s < n; ++s) {
      const double expected = std::sqrt(set.lambdas[n - 1 - s]);  // ascending
      CHECK(std::fabs(mapped.eigenvalues[s] - expected) <= 1e-9 * std::max(1.0, expected));
    }
  }

  const te::OscillatorSystem soft(2, 1.0, 1.0, 1.0, 1.0, 0.0);
  CHECK_THROWS_AS(te::vacuum_matrix(soft), te::DomainError);
}

TEST_CASE("temperature_from_xi closed form") {
  CHECK(std::fabs(te::temperature_from_xi(1.0, 1.0) - 1.3531) <= 2e-4);
  CHECK(te::temperature_from_xi(3.0) == Catch::Approx(1.0 / std::log(9.0 / 7.0)).epsilon(1e-12));
  CHECK(te::temperature_from_xi(1.0, 2.0) ==
        Catch::Approx(2.0 * te::temperature_from_xi(1.0, 1.0)).epsilon(1e-15));
  CHECK(te::temperature_from_xi(1e-8) < 0.06);

  double prev = 0.0;
  for (double xi : {0.01, 0.1, 0.5, 1.0, 5.0, 50.0}) {
    const double theta = te::temperature_from_xi(xi);
    CHECK(theta > prev);
    prev = theta;
  }

  CHECK_THROWS_AS(te::temperature_from_xi(0.0), te::DomainError);
  CHECK_THROWS_AS(te::temperature_from_xi(-1.0), te::DomainError);
  CHECK_THROWS_AS(te::temperature_from_xi(1.0, 0.0), te::DomainError);
}

TEST_CASE("g_from_xi feeds the thermal weight") {
  for (double xi : {0.05, 0.3, 1.0, 7.0, 100.0}) {
    const double g = te::g_from_xi(xi);
    CHECK(g > 0.0);
    CHECK(g < 1.0);
    const double theta = te::temperature_from_xi(xi);
    CHECK(std::exp(-1.0 / theta) == Catch::Approx(g).margin(1e-14));
  }
  CHECK_THROWS_AS(te::g_from_xi(0.0), te::DomainError);
}

TEST_CASE("fig2_curve rows and classical limit") {
  std::vector<double> grid;
  const double lo = 0.05, hi = 100.0;
  constexpr int kPoints = 41;
  for (int i = 0; i < kPoints; ++i)
    grid.push_back(lo * std::pow(hi / lo, double(i) / (kPoints - 1)));
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());

  const std::vector<te::Fig2Row> rows = te::fig2_curve(grid);
  REQUIRE(rows.size() == grid.size());

  double prev_ratio = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].xi == grid[i]);
    const double ratio = rows[i].mean_energy / rows[i].theta;
    CHECK(ratio > prev_ratio);
    prev_ratio = ratio;

    if (rows[i].xi == 1.0) {
      CHECK(std::fabs(rows[i].theta - 1.3531) <= 2e-4);
      // closed form: mean energy at xi = 1 is (2 sqrt 2 - 1)/2
      CHECK(rows[i].mean_energy ==
            Catch::Approx(0.5 * (2.0 * std::sqrt(2.0) - 1.0)).epsilon(1e-12));
    }
    if (rows[i].xi == lo) CHECK(rows[i].mean_energy < rows[i].theta);
    if (rows[i].xi == hi) CHECK(ratio > 0.98);
  }

  CHECK_THROWS_AS(te::fig2_curve({1.0, -2.0}), te::DomainError);
}

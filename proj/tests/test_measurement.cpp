#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "thermo_entangle/hermite.hpp"
#include "thermo_entangle/measurement.hpp"

namespace te = thermo_entangle;

TEST_CASE("ThermalParams keeps weight and temperature consistent") {
  const te::ThermalParams half = te::ThermalParams::from_g(0.5);
  CHECK(half.theta() == Catch::Approx(1.4426950408889634).epsilon(1e-15));
  CHECK(std::exp(-half.hbar_omega() / half.theta()) == Catch::Approx(0.5).margin(1e-14));

  const te::ThermalParams unit = te::ThermalParams::from_theta(1.0);
  CHECK(unit.g() == Catch::Approx(0.36787944117144233).epsilon(1e-15));

  CHECK(te::ThermalParams::from_g(0.0).theta() == 0.0);
  CHECK(te::ThermalParams::from_theta(0.0).g() == 0.0);

  CHECK_THROWS_AS(te::ThermalParams::from_g(1.0), te::DomainError);
  CHECK_THROWS_AS(te::ThermalParams::from_g(-0.1), te::DomainError);
  CHECK_THROWS_AS(te::ThermalParams::from_g(0.5, 0.0), te::DomainError);
  CHECK_THROWS_AS(te::ThermalParams::from_theta(-1.0), te::DomainError);
}

TEST_CASE("temperature_from_g closed form") {
  CHECK(te::temperature_from_g(0.5) == Catch::Approx(1.4426950408889634).epsilon(1e-15));
  CHECK(te::temperature_from_g(std::exp(-1.0)) == Catch::Approx(1.0).epsilon(1e-14));
  for (double g : {0.1, 0.37, 0.82, 0.99}) {
    CHECK(std::exp(-2.5 / te::temperature_from_g(g, 2.5)) ==
          Catch::Approx(g).margin(1e-14));
  }
  CHECK_THROWS_AS(te::temperature_from_g(0.0), te::DomainError);
  CHECK_THROWS_AS(te::temperature_from_g(1.0), te::DomainError);
  CHECK_THROWS_AS(te::temperature_from_g(0.5, -1.0), te::DomainError);
}

TEST_CASE("pmf_total geometric law") {
  const te::ThermalParams half = te::ThermalParams::from_g(0.5);
  CHECK(te::pmf_total(half, 0) == Catch::Approx(0.5).margin(0.0));
  CHECK(te::pmf_total(half, 1) == Catch::Approx(0.25).margin(0.0));
  CHECK(te::pmf_total(half, 2) == Catch::Approx(0.125).margin(0.0));

  const te::ThermalParams cold = te::ThermalParams::from_g(0.0);
  CHECK(te::pmf_total(cold, 0) == 1.0);
  CHECK(te::pmf_total(cold, 3) == 0.0);

  for (double g : {0.3, 0.5, 0.7, 0.95}) {
    const te::ThermalParams params = te::ThermalParams::from_g(g);
    for (int cap : {0, 5, 23, 60}) {
      double acc = 0.0;
      for (int n = 0; n <= cap; ++n) acc += te::pmf_total(params, n);
      CHECK(std::fabs(acc - (1.0 - std::pow(g, cap + 1))) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(te::pmf_total(half, -1), te::DomainError);
}

TEST_CASE("planck_mean") {
  CHECK(te::planck_mean(te::ThermalParams::from_g(0.5)) == 1.0);
  CHECK(te::planck_mean(te::ThermalParams::from_g(0.0)) == 0.0);
  CHECK(te::planck_mean(te::ThermalParams::from_g(0.9)) == Catch::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("pmf_conditional multinomial") {
  // f^2 = 0.5 with relative weights (0.6, 0.4)
  const te::ParamVector f({std::sqrt(0.3), std::sqrt(0.2)});
  CHECK(te::pmf_conditional(f, te::MultiIndex({1, 1})) == Catch::Approx(0.48).margin(1e-14));
  CHECK(te::pmf_conditional(f, te::MultiIndex({0, 0})) == 1.0);

  double acc = 0.0;
  std::vector<int> occ = te::first_composition(3, 2);
  do {
    acc += te::pmf_conditional(f, te::MultiIndex(occ));
  } while (te::next_composition(occ));
  CHECK(acc == Catch::Approx(1.0).margin(1e-14));

  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> uf(0.05, 0.4);
  std::uniform_int_distribution<int> ur(1, 4);
  std::uniform_int_distribution<int> un(0, 12);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = ur(gen);
    std::vector<double> raw(r);
    for (double& v : raw) v = uf(gen);
    const te::ParamVector fr(raw);
    const int total = un(gen);
    double sum = 0.0;
    std::vector<int> idx = te::first_composition(total, r);
    do {
      sum += te::pmf_conditional(fr, te::MultiIndex(idx));
    } while (te::next_composition(idx));
    CHECK(sum == Catch::Approx(1.0).margin(1e-13));
  }

  CHECK_THROWS_AS(te::pmf_conditional(f, te::MultiIndex({1})), te::DomainError);
  const te::ParamVector zero({0.0, 0.0});
  CHECK(te::pmf_conditional(zero, te::MultiIndex({0, 0})) == 1.0);
  CHECK(te::pmf_conditional(zero, te::MultiIndex({1, 0})) == 0.0);
}

TEST_CASE("pmf_joint closed form and factorization") {
  const te::ParamVector f({std::sqrt(0.3), std::sqrt(0.2)});
  const te::ThermalParams params = te::ThermalParams::from_g(f.norm_sq());
  CHECK(te::pmf_joint(f, params, te::MultiIndex({0, 0})) == Catch::Approx(0.5).margin(1e-15));
  CHECK(te::pmf_joint(f, params, te::MultiIndex({1, 0})) == Catch::Approx(0.15).margin(1e-14));

  // the joint law refuses foreign thermal parameters
  CHECK_THROWS_AS(te::pmf_joint(f, te::ThermalParams::from_g(0.3), te::MultiIndex({0, 0})),
                  te::ConsistencyError);

  std::mt19937_64 gen(32);
  std::uniform_real_distribution<double> uf(0.05, 0.4);
  std::uniform_int_distribution<int> ur(1, 5);
  std::uniform_int_distribution<int> uocc(0, 8);
  int checked = 0;
  while (checked < 1000) {
    const int r = ur(gen);
    std::vector<double> raw(r);
    double norm = 0.0;
    for (double& v : raw) {
      v = uf(gen);
      norm += v * v;
    }
    if (norm >= 0.9) continue;
    const te::ParamVector fr(raw);
    const te::ThermalParams pr = te::ThermalParams::from_g(fr.norm_sq());
    std::vector<int> occ(r);
    for (int& v : occ) v = uocc(gen);
    const te::MultiIndex idx(occ);
    const double joint = te::pmf_joint(fr, pr, idx);
    const double split = te::pmf_total(pr, idx.total()) * te::pmf_conditional(fr, idx);
    CHECK(std::fabs(joint - split) <= 1e-14);
    ++checked;
  }
}

TEST_CASE("pmf_marginal geometric form") {
  // equal weights, f^2 = 0.5: pi = 2/3
  const te::ParamVector f({0.5, 0.5});
  const te::ThermalParams params = te::ThermalParams::from_g(0.5);
  CHECK(te::pmf_marginal(f, params, 0, 0) == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(te::pmf_marginal(f, params, 0, 1) == Catch::Approx(2.0 / 9.0).epsilon(1e-14));

  CHECK_THROWS_AS(te::pmf_marginal(f, params, 2, 0), te::DomainError);
  CHECK_THROWS_AS(te::pmf_marginal(f, params, 0, -1), te::DomainError);

  const te::ParamVector f0({0.3});
  const te::ThermalParams cold = te::ThermalParams::from_g(0.0);
  CHECK(te::pmf_marginal(f0, cold, 0, 0) == 1.0);
  CHECK(te::pmf_marginal(f0, cold, 0, 2) == 0.0);
}

TEST_CASE("pmf_marginal agrees with the lattice-summed joint law") {
  const te::ParamVector f({0.5, 0.4, 0.3});
  const te::ThermalParams params = te::ThermalParams::from_g(f.norm_sq());
  const int r = f.size();
  constexpr int kCap = 80;
  constexpr int kMaxK = 6;

  std::vector<std::vector<double>> marg(r, std::vector<double>(kMaxK + 1, 0.0));
  for (int total = 0; total <= kCap; ++total) {
    std::vector<int> occ = te::first_composition(total, r);
    do {
      const te::MultiIndex idx(occ);
      const double q = te::pmf_joint(f, params, idx);
      for (int j = 0; j < r; ++j)
        if (occ[j] <= kMaxK) marg[j][occ[j]] += q;
    } while (te::next_composition(occ));
  }

  for (int j = 0; j < r; ++j) {
    for (int k = 0; k <= kMaxK; ++k) {
      INFO("j=" << j << " k=" << k);
      CHECK(std::fabs(marg[j][k] - te::pmf_marginal(f, params, j, k)) <= 1e-10);
    }
  }
}

TEST_CASE("mean identities") {
  const te::ParamVector f({0.5, 0.5});
  const te::ThermalParams params = te::ThermalParams::from_g(0.5);
  CHECK(te::mean_occupation(f, params, 0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(te::mean_energy(f, params, 0) == Catch::Approx(0.5).margin(1e-15));

  std::mt19937_64 gen(33);
  std::uniform_real_distribution<double> uf(0.05, 0.4);
  std::uniform_int_distribution<int> ur(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = ur(gen);
    std::vector<double> raw(r);
    double norm = 0.0;
    for (double& v : raw) {
      v = uf(gen);
      norm += v * v;
    }
    if (norm >= 0.9) continue;
    const te::ParamVector fr(raw);
    const te::ThermalParams pr = te::ThermalParams::from_g(fr.norm_sq());

    double acc = 0.0;
    for (int j = 0; j < r; ++j) {
      const double mean_j = te::mean_occupation(fr, pr, j);
      acc += mean_j;
      // geometric-law mean of the marginal: (1 - pi_j)/pi_j
      const double pi = te::pmf_marginal(fr, pr, j, 0);
      CHECK(std::fabs((1.0 - pi) / pi - mean_j) <= 1e-14 * (1.0 + mean_j));
    }
    CHECK(std::fabs(acc - te::planck_mean(pr)) <= 1e-14 * (1.0 + acc));
  }

  CHECK(te::mean_occupation(f, te::ThermalParams::from_g(0.0), 1) == 0.0);
  CHECK_THROWS_AS(te::mean_occupation(f, params, 5), te::DomainError);
}

TEST_CASE("sampler determinism and bookkeeping") {
  const te::ParamVector f({0.5, 0.5});
  const te::ThermalParams params = te::ThermalParams::from_g(0.5);
  const auto a = te::sample(f, params, 500, 42);
  const auto b = te::sample(f, params, 500, 42);
  REQUIRE(a.size() == 500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].n_total() == b[i].n_total());
    CHECK(a[i].occupations().values() == b[i].occupations().values());
    CHECK(a[i].occupations().total() == a[i].n_total());
  }
  const auto c = te::sample(f, params, 500, 43);
  bool any_differ = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].n_total() != c[i].n_total()) any_differ = true;
  CHECK(any_differ);

  CHECK_THROWS_AS(te::sample(f, params, 0, 1), te::DomainError);
  CHECK_THROWS_AS(te::sample(te::ParamVector({0.0}), params, 10, 1), te::DomainError);

  const auto cold = te::sample(f, te::ThermalParams::from_g(0.0), 64, 7);
  for (const auto& s : cold) {
    CHECK(s.n_total() == 0);
    for (int v : s.occupations().values()) CHECK(v == 0);
  }
}

TEST_CASE("sampler matches the analytic laws at scale") {
  const te::ParamVector f({0.5, 0.5});
  const te::ThermalParams params = te::ThermalParams::from_g(0.5);
  constexpr std::int64_t kCount = 200000;
  const auto samples = te::sample(f, params, kCount, 20240902);

  double mean = 0.0;
  for (const auto& s : samples) mean += s.n_total();
  mean /= double(kCount);
  // geometric variance g/(1-g)^2 = 2; three sigma of the sample mean
  const double three_sigma = 3.0 * std::sqrt(2.0 / double(kCount));
  CHECK(std::fabs(mean - 1.0) <= three_sigma);

  const te::Histogram totals = te::Histogram::of_totals(samples);
  const auto total_cmp = te::compare_histogram(
      totals, [&](int n) { return te::pmf_total(params, n); });
  CHECK(te::chi2_pvalue(total_cmp.chi2, total_cmp.dof) > 0.001);

  for (int j = 0; j < 2; ++j) {
    const te::Histogram h = te::Histogram::of_particle(samples, j);
    const auto cmp = te::compare_histogram(
        h, [&](int k) { return te::pmf_marginal(f, params, j, k); });
    INFO("particle " << j << " chi2=" << cmp.chi2 << " dof=" << cmp.dof);
    CHECK(te::chi2_pvalue(cmp.chi2, cmp.dof) > 0.001);
    CHECK(cmp.max_abs_dev < 0.01);
  }
}

TEST_CASE("compare_histogram behaviour") {
  // histogram drawn from its own law stays near chi2/dof = 1
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    const te::ParamVector f({0.5, 0.5});
    const te::ThermalParams params = te::ThermalParams::from_g(0.5);
    const auto samples = te::sample(f, params, 100000, seed);
    const te::Histogram totals = te::Histogram::of_totals(samples);
    const auto cmp = te::compare_histogram(
        totals, [&](int n) { return te::pmf_total(params, n); });
    INFO("seed=" << seed << " chi2=" << cmp.chi2 << " dof=" << cmp.dof);
    CHECK(cmp.chi2 / cmp.dof >= 0.5);
    CHECK(cmp.chi2 / cmp.dof <= 2.0);
  }

  // constant-zero histogram against the ground-state law: exact match
  {
    te::Histogram h;
    h.add(0, 1000);
    const te::ThermalParams cold = te::ThermalParams::from_g(0.0);
    const auto cmp = te::compare_histogram(h, [&](int n) { return te::pmf_total(cold, n); });
    CHECK(cmp.chi2 == 0.0);
    CHECK(cmp.dof == 0);
    CHECK(te::chi2_pvalue(cmp.chi2, cmp.dof) == 1.0);
  }

  // gross mismatch: draws at g = 0.5 against the g = 0.9 law
  {
    const te::ParamVector f({0.5, 0.5});
    const auto samples = te::sample(f, te::ThermalParams::from_g(0.5), 20000, 11);
    const te::Histogram totals = te::Histogram::of_totals(samples);
    const te::ThermalParams hot = te::ThermalParams::from_g(0.9);
    const auto cmp = te::compare_histogram(
        totals, [&](int n) { return te::pmf_total(hot, n); });
    CHECK(cmp.chi2 / cmp.dof > 10.0);
  }

  // too few draws for any bin to qualify
  {
    te::Histogram h;
    h.add(0, 3);
    const te::ThermalParams params = te::ThermalParams::from_g(0.5);
    CHECK_THROWS_MATCHES(
        te::compare_histogram(h, [&](int n) { return te::pmf_total(params, n); }), te::Error,
        Catch::Matchers::MessageMatches(
            Catch::Matchers::ContainsSubstring("increase the sample count")));
  }

  CHECK_THROWS_AS(te::compare_histogram(te::Histogram{}, [](int) { return 1.0; }),
                  te::DomainError);
}

TEST_CASE("regularized_gamma_q against reference values") {
  CHECK(te::regularized_gamma_q(0.5, 1.0) == Catch::Approx(0.15729920705028513).epsilon(1e-12));
  CHECK(te::regularized_gamma_q(2.5, 3.0) == Catch::Approx(0.3062189184132784).epsilon(1e-12));
  CHECK(te::regularized_gamma_q(5.0, 2.0) == Catch::Approx(0.9473469826562888).epsilon(1e-12));
  CHECK(te::regularized_gamma_q(1.0, 0.1) == Catch::Approx(0.9048374180359595).epsilon(1e-12));
  CHECK(te::regularized_gamma_q(3.0, 0.0) == 1.0);
  // Q(1, x) = exp(-x)
  for (double x : {0.2, 1.0, 2.7, 8.0, 25.0}) {
    CHECK(te::regularized_gamma_q(1.0, x) == Catch::Approx(std::exp(-x)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(te::regularized_gamma_q(0.0, 1.0), te::DomainError);
  CHECK_THROWS_AS(te::regularized_gamma_q(1.0, -1.0), te::DomainError);
}

TEST_CASE("chi2_pvalue reference values") {
  CHECK(te::chi2_pvalue(3.841, 1) == Catch::Approx(0.0500136837639567).epsilon(1e-10));
  CHECK(te::chi2_pvalue(10.0, 10) == Catch::Approx(0.4404932850652124).epsilon(1e-10));
  CHECK(te::chi2_pvalue(31.41, 20) == Catch::Approx(0.050005239202315165).epsilon(1e-10));
  CHECK(te::chi2_pvalue(0.0, 0) == 1.0);
  CHECK(te::chi2_pvalue(0.5, 0) == 0.0);
  CHECK_THROWS_AS(te::chi2_pvalue(1.0, -1), te::DomainError);
}

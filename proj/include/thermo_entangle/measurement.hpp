#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "thermo_entangle/common.hpp"
#include "thermo_entangle/epr_state.hpp"
#include "thermo_entangle/parallel.hpp"
#include "thermo_entangle/rng.hpp"

namespace thermo_entangle {

/// Boltzmann weight g paired with the temperature it encodes through
/// g = exp(-hbar_omega/theta); theta = 0 and g = 0 identify the ground
/// state. Construct through from_g or from_theta so the pair stays
/// consistent.
class ThermalParams {
 public:
  static ThermalParams from_g(double g, double hbar_omega = 1.0) {
    check_unit(hbar_omega);
    if (g < 0.0 || g >= 1.0)
      throw DomainError("ThermalParams: weight must lie in [0, 1)");
    const double theta = (g == 0.0) ? 0.0 : -hbar_omega / std::log(g);
    return ThermalParams(g, theta, hbar_omega);
  }

  static ThermalParams from_theta(double theta, double hbar_omega = 1.0) {
    check_unit(hbar_omega);
    if (theta < 0.0 || !std::isfinite(theta))
      throw DomainError("ThermalParams: temperature must be finite and non-negative");
    const double g = (theta == 0.0) ? 0.0 : std::exp(-hbar_omega / theta);
    return ThermalParams(g, theta, hbar_omega);
  }

  double g() const { return g_; }
  double theta() const { return theta_; }
  double hbar_omega() const { return hbar_omega_; }

 private:
  ThermalParams(double g, double theta, double hbar_omega)
      : g_(g), theta_(theta), hbar_omega_(hbar_omega) {}

  static void check_unit(double hbar_omega) {
    if (!(hbar_omega > 0.0) || !std::isfinite(hbar_omega))
      throw DomainError("ThermalParams: energy unit must be positive and finite");
  }

  double g_;
  double theta_;
  double hbar_omega_;
};

/// theta = -hbar_omega / ln g for g strictly inside (0, 1). g = 0 belongs
/// to ThermalParams::from_g, which maps it to theta = 0 by convention.
inline double temperature_from_g(double g, double hbar_omega = 1.0) {
  if (!(g > 0.0 && g < 1.0))
    throw DomainError("temperature_from_g: weight must lie strictly in (0, 1)");
  if (!(hbar_omega > 0.0))
    throw DomainError("temperature_from_g: energy unit must be positive");
  return -hbar_omega / std::log(g);
}

/// Total-occupation law P_n = (1-g) g^n.
inline double pmf_total(const ThermalParams& params, int n) {
  if (n < 0) throw DomainError("pmf_total: occupation must be non-negative");
  return (1.0 - params.g()) * std::pow(params.g(), n);
}

/// Mean total occupation g/(1-g) = 1/(exp(hbar_omega/theta) - 1).
inline double planck_mean(const ThermalParams& params) {
  return params.g() / (1.0 - params.g());
}

/// Occupation split conditioned on the total: multinomial with weights
/// p_j = f_j^2/f^2, evaluated in log space.
inline double pmf_conditional(const ParamVector& f, const MultiIndex& idx) {
  if (idx.size() != f.size())
    throw DomainError("pmf_conditional: occupation length must match parameter length");
  if (f.norm_sq() == 0.0) return idx.total() == 0 ? 1.0 : 0.0;
  if (idx.total() == 0) return 1.0;
  double log_p = std::lgamma(double(idx.total()) + 1.0);
  for (int j = 0; j < f.size(); ++j) {
    const int k = idx[j];
    if (k == 0) continue;
    const double pj = f.occupation_weight(j);
    if (pj == 0.0) return 0.0;
    log_p += k * std::log(pj) - std::lgamma(double(k) + 1.0);
  }
  return std::exp(log_p);
}

/// Joint occupation law evaluated from its closed form
///   (1-g) n!/(k_1!..k_r!) g^n p_1^{k_1} .. p_r^{k_r},
/// which factorizes as pmf_total(n) * pmf_conditional. The law is only
/// defined on the state's own thermal weight, so g must equal f^2.
inline double pmf_joint(const ParamVector& f, const ThermalParams& params,
                        const MultiIndex& idx) {
  if (idx.size() != f.size())
    throw DomainError("pmf_joint: occupation length must match parameter length");
  if (std::fabs(params.g() - f.norm_sq()) > 1e-12)
    throw ConsistencyError("pmf_joint: thermal weight g = " + std::to_string(params.g()) +
                           " does not match the state's f^2 = " +
                           std::to_string(f.norm_sq()));
  const double g = params.g();
  if (idx.total() == 0) return 1.0 - g;
  if (g == 0.0) return 0.0;
  double log_p = std::log1p(-g) + std::lgamma(double(idx.total()) + 1.0);
  for (int j = 0; j < f.size(); ++j) {
    const int k = idx[j];
    if (k == 0) continue;
    const double pj = f.occupation_weight(j);
    if (pj == 0.0) return 0.0;
    log_p += k * std::log(g * pj) - std::lgamma(double(k) + 1.0);
  }
  return std::exp(log_p);
}

/// Single-particle marginal: geometric with
///   pi_j = (1-g) / (1 - g(1-p_j)),  P_j(k) = pi_j (1-pi_j)^k.
/// Assumes the state's own thermal weight, like pmf_joint.
inline double pmf_marginal(const ParamVector& f, const ThermalParams& params, int j, int k) {
  if (j < 0 || j >= f.size()) throw DomainError("pmf_marginal: particle index out of range");
  if (k < 0) throw DomainError("pmf_marginal: occupation must be non-negative");
  const double g = params.g();
  if (g == 0.0) return k == 0 ? 1.0 : 0.0;
  const double pj = f.occupation_weight(j);
  const double pi = (1.0 - g) / (1.0 - g * (1.0 - pj));
  return pi * std::pow(1.0 - pi, k);
}

/// Mean occupation of particle j: p_j g/(1-g) = p_j/(exp(hbar_omega/theta)-1).
inline double mean_occupation(const ParamVector& f, const ThermalParams& params, int j) {
  if (j < 0 || j >= f.size()) throw DomainError("mean_occupation: particle index out of range");
  if (params.g() == 0.0) return 0.0;
  return f.occupation_weight(j) * params.g() / (1.0 - params.g());
}

/// Mean excitation energy of particle j.
inline double mean_energy(const ParamVector& f, const ThermalParams& params, int j) {
  return params.hbar_omega() * mean_occupation(f, params, j);
}

/// One post-measurement record: the detector reading and the induced
/// occupation split, which must account for every quantum.
class MeasurementSample {
 public:
  MeasurementSample(int n_total, MultiIndex occupations)
      : n_total_(n_total), occupations_(std::move(occupations)) {
    if (occupations_.total() != n_total_)
      throw ConsistencyError("MeasurementSample: occupations must sum to the total");
  }

  int n_total() const { return n_total_; }
  const MultiIndex& occupations() const { return occupations_; }

 private:
  int n_total_;
  MultiIndex occupations_;
};

/// Two-stage sampler: total occupation by inverse-CDF geometric, then the
/// split by sequential conditional binomials. Sample index i draws from its
/// own SplitMix64 sub-stream, so runs are deterministic in (seed, count)
/// and identical for any worker count.
inline std::vector<MeasurementSample> sample(const ParamVector& f, const ThermalParams& params,
                                             std::int64_t count, std::uint64_t seed) {
  if (count < 1) throw DomainError("sample: count must be at least 1");
  const int r = f.size();
  const double g = params.g();
  if (f.norm_sq() == 0.0 && g > 0.0)
    throw DomainError("sample: zero parameter vector admits no occupations for positive g");

  std::vector<double> p(r, 0.0);
  std::vector<double> suffix(r + 1, 0.0);
  if (f.norm_sq() > 0.0) {
    for (int j = 0; j < r; ++j) p[j] = f.occupation_weight(j);
    for (int j = r - 1; j >= 0; --j) suffix[j] = suffix[j + 1] + p[j];
  }

  std::vector<MeasurementSample> out;
  out.reserve(count);
  for (std::int64_t i = 0; i < count; ++i)
    out.emplace_back(0, MultiIndex(std::vector<int>(r, 0)));

  parallel_for(0, count, [&](std::int64_t i) {
    SplitMix64 gen = SplitMix64::substream(seed, static_cast<std::uint64_t>(i));
    const int n = sample_geometric(gen, g);
    std::vector<int> occ(r, 0);
    int remaining = n;
    for (int j = 0; j + 1 < r; ++j) {
      double q = suffix[j] > 0.0 ? p[j] / suffix[j] : 1.0;
      if (q > 1.0) q = 1.0;
      const int b = sample_binomial(gen, remaining, q);
      occ[j] = b;
      remaining -= b;
    }
    occ[r - 1] = remaining;
    out[i] = MeasurementSample(n, MultiIndex(std::move(occ)));
  });
  return out;
}

/// Counts over scalar bins (a particle's occupation, or the total).
class Histogram {
 public:
  void add(int key, std::int64_t weight = 1) {
    if (weight < 0) throw DomainError("Histogram: weight must be non-negative");
    counts_[key] += weight;
    total_ += weight;
  }

  const std::map<int, std::int64_t>& counts() const { return counts_; }
  std::int64_t total() const { return total_; }

  static Histogram of_totals(const std::vector<MeasurementSample>& samples) {
    Histogram h;
    for (const MeasurementSample& s : samples) h.add(s.n_total());
    return h;
  }

  static Histogram of_particle(const std::vector<MeasurementSample>& samples, int j) {
    Histogram h;
    for (const MeasurementSample& s : samples) {
      if (j < 0 || j >= s.occupations().size())
        throw DomainError("Histogram: particle index out of range");
      h.add(s.occupations()[j]);
    }
    return h;
  }

 private:
  std::map<int, std::int64_t> counts_;
  std::int64_t total_ = 0;
};

struct HistogramComparison {
  double chi2;
  int dof;
  double max_abs_dev;
};

/// Pearson chi-square of a histogram against an analytic law on the
/// non-negative integers. Bins are scanned from k = 0 while the expected
/// count stays at or above 5; everything past that is pooled into one tail
/// bin. dof = bins - 1.
inline HistogramComparison compare_histogram(const Histogram& h,
                                             const std::function<double(int)>& pmf) {
  if (h.total() < 1) throw DomainError("compare_histogram: histogram is empty");
  const double total = static_cast<double>(h.total());

  const auto observed = [&](int k) {
    const auto it = h.counts().find(k);
    return it == h.counts().end() ? 0.0 : static_cast<double>(it->second);
  };

  double chi2 = 0.0;
  double max_dev = 0.0;
  double kept_prob = 0.0;
  double kept_obs = 0.0;
  int bins = 0;
  for (int k = 0;; ++k) {
    const double prob = pmf(k);
    const double expected = total * prob;
    if (expected < 5.0) break;
    const double obs = observed(k);
    chi2 += (obs - expected) * (obs - expected) / expected;
    max_dev = std::max(max_dev, std::fabs(obs - expected) / total);
    kept_prob += prob;
    kept_obs += obs;
    ++bins;
  }
  if (bins == 0)
    throw Error("compare_histogram: no bin reaches the expected-count threshold of 5; "
                "increase the sample count");

  const double tail_expected = total * std::max(0.0, 1.0 - kept_prob);
  const double tail_obs = total - kept_obs;
  if (tail_obs > 0.0 || tail_expected > 1e-12 * total) {
    const double safe_expected = std::max(tail_expected, 1e-300);
    chi2 += (tail_obs - tail_expected) * (tail_obs - tail_expected) / safe_expected;
    max_dev = std::max(max_dev, std::fabs(tail_obs - tail_expected) / total);
    ++bins;
  }
  return HistogramComparison{chi2, bins - 1, max_dev};
}

/// Upper regularized incomplete gamma Q(a, x): series for P below the
/// crossover, Lentz continued fraction for Q above it.
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0)
    throw DomainError("regularized_gamma_q: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(log_prefactor);
  }
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(log_prefactor) * h;
}

/// Right-tail p-value of a chi-square statistic.
inline double chi2_pvalue(double chi2, int dof) {
  if (dof < 0) throw DomainError("chi2_pvalue: degrees of freedom must be non-negative");
  if (dof == 0) return chi2 <= 0.0 ? 1.0 : 0.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * chi2);
}

}  // namespace thermo_entangle

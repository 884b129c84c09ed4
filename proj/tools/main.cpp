#include <algorithm>
#include <cctype>
#include <clocale>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermo_entangle/checks.hpp"
#include "thermo_entangle/epr_state.hpp"
#include "thermo_entangle/linalg.hpp"
#include "thermo_entangle/measurement.hpp"
#include "thermo_entangle/oscillator.hpp"

namespace te = thermo_entangle;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_csv_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const auto begin = token.find_first_not_of(" \t");
    if (begin == std::string::npos)
      throw te::DomainError(flag + ": empty value in list '" + text + "'");
    const auto end = token.find_last_not_of(" \t");
    token = token.substr(begin, end - begin + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      throw te::DomainError(flag + ": cannot parse '" + token + "' as a number");
    }
    if (used != token.size())
      throw te::DomainError(flag + ": cannot parse '" + token + "' as a number");
    out.push_back(value);
  }
  if (out.empty()) throw te::DomainError(flag + ": needs at least one value");
  return out;
}

class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw te::DomainError("cannot open output path '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

/// Fail-closed config reader: schema must be 1, the command must match, and
/// any field outside the allowed set is rejected so stale configs cannot
/// silently drive the wrong run.
ordered_json load_config(const std::string& path, const std::string& command,
                         const std::vector<std::string>& allowed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw te::DomainError("config: cannot open '" + path + "'");
  ordered_json cfg;
  try {
    cfg = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw te::DomainError(std::string("config: ") + e.what());
  }
  if (!cfg.is_object()) throw te::DomainError("config: top level must be an object");
  if (!cfg.contains("schema") || !cfg["schema"].is_number_integer() ||
      cfg["schema"].get<int>() != 1)
    throw te::DomainError("config: requires \"schema\": 1");
  if (cfg.contains("command") && cfg["command"].get<std::string>() != command)
    throw te::DomainError("config: command '" + cfg["command"].get<std::string>() +
                          "' does not match subcommand '" + command + "'");
  for (const auto& item : cfg.items()) {
    const std::string& key = item.key();
    if (key == "schema" || key == "command") continue;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw te::DomainError("config: unknown field '" + key + "'");
  }
  return cfg;
}

ordered_json dense_json(const te::Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json dense_json(const te::SymMatrix& m) { return dense_json(m.to_dense()); }

// ---------------------------------------------------------------------------
// state

int run_state(const CLI::App& cmd, const std::string& f_flag, int trunc_flag,
              const std::string& config_path, const std::string& out_path) {
  std::vector<double> f_values;
  int trunc = -1;
  if (!config_path.empty()) {
    const ordered_json file = load_config(config_path, "state", {"f", "trunc"});
    if (file.contains("f")) f_values = file["f"].get<std::vector<double>>();
    if (file.contains("trunc")) trunc = file["trunc"].get<int>();
  }
  if (cmd.count("--f")) f_values = parse_csv_doubles(f_flag, "--f");
  if (cmd.count("--trunc")) trunc = trunc_flag;
  if (f_values.empty()) throw te::DomainError("state: provide --f or a config with an f array");

  const te::ParamVector f(f_values);
  if (f.norm_sq() == 0.0)
    throw te::DomainError("state: f^2 = 0 leaves the spectrum directions undefined");
  if (trunc < 0) trunc = te::default_truncation(f);

  ordered_json cfg;
  cfg["schema"] = 1;
  cfg["command"] = "state";
  cfg["f"] = f_values;
  cfg["trunc"] = trunc;

  const te::VacuumForm form = te::build_matrix_a(f);
  const te::AnalyticSpectrum analytic = te::analytic_spectrum(f);
  const te::Spectrum numeric = te::eigh_symmetric(form.a());

  struct WeightEntry {
    std::vector<int> index;
    double weight;
  };
  const auto better = [](const WeightEntry& a, const WeightEntry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.index < b.index;
  };
  std::vector<WeightEntry> top;
  const double g = f.norm_sq();
  constexpr std::size_t kTableSize = 10;
  constexpr long long kEnumerationCap = 2000000;
  long long enumerated = 0;
  bool table_complete = true;
  for (int total = 0; total <= trunc && table_complete; ++total) {
    // every weight in shell `total` is bounded by the shell mass (1-g) g^total
    if (top.size() == kTableSize &&
        (1.0 - g) * std::pow(g, total) < top.back().weight)
      break;
    std::vector<int> occ = te::first_composition(total, f.size());
    do {
      if (++enumerated > kEnumerationCap) {
        table_complete = false;
        break;
      }
      WeightEntry entry{occ, te::schmidt_weight(f, te::MultiIndex(occ))};
      if (top.size() < kTableSize || better(entry, top.back())) {
        top.push_back(std::move(entry));
        std::sort(top.begin(), top.end(), better);
        if (top.size() > kTableSize) top.pop_back();
      }
    } while (te::next_composition(occ));
  }

  ordered_json report;
  report["config"] = cfg;
  report["matrix_a"] = dense_json(form.a());
  report["det_a"] = te::determinant(form.a());
  ordered_json spectrum;
  spectrum["eigenvalues_numeric"] = numeric.eigenvalues;
  spectrum["lambda_max_analytic"] = analytic.lambda_max;
  spectrum["lambda_min_analytic"] = analytic.lambda_min;
  spectrum["v_max"] = analytic.v_max;
  spectrum["v_min"] = analytic.v_min;
  spectrum["extreme_error"] =
      std::max(std::fabs(numeric.eigenvalues.front() - analytic.lambda_min),
               std::fabs(numeric.eigenvalues.back() - analytic.lambda_max));
  spectrum["product_error"] =
      std::fabs(numeric.eigenvalues.front() * numeric.eigenvalues.back() - 1.0);
  report["spectrum"] = std::move(spectrum);
  report["covariance"] = dense_json(te::covariance(form));
  ordered_json weights = ordered_json::array();
  for (const WeightEntry& entry : top) {
    ordered_json item;
    item["index"] = entry.index;
    item["total"] = std::accumulate(entry.index.begin(), entry.index.end(), 0);
    item["weight"] = entry.weight;
    weights.push_back(std::move(item));
  }
  report["top_weights"] = std::move(weights);
  report["table_complete"] = table_complete;

  OutputTarget out(out_path);
  out.stream() << report.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// sample

int run_sample(const CLI::App& cmd, const std::string& f_flag, double g_flag,
               const std::string& p_flag, int r_flag, std::int64_t count_flag,
               std::uint64_t seed_flag, const std::string& config_path,
               const std::string& out_path, const std::string& format) {
  std::vector<double> f_values;
  std::int64_t count = 1;
  bool have_seed = false;
  std::uint64_t seed = 0;
  if (!config_path.empty()) {
    const ordered_json file = load_config(config_path, "sample", {"f", "count", "seed"});
    if (file.contains("f")) f_values = file["f"].get<std::vector<double>>();
    if (file.contains("count")) count = file["count"].get<std::int64_t>();
    if (file.contains("seed")) {
      seed = file["seed"].get<std::uint64_t>();
      have_seed = true;
    }
  }

  const bool flag_f = cmd.count("--f") > 0;
  const bool flag_g = cmd.count("--g") > 0;
  if (flag_f && (flag_g || cmd.count("--p") || cmd.count("--r")))
    throw te::DomainError("sample: --f excludes --g/--p/--r");
  if (flag_f) {
    f_values = parse_csv_doubles(f_flag, "--f");
  } else if (flag_g) {
    if (!(g_flag >= 0.0 && g_flag < 1.0))
      throw te::DomainError("sample: --g must lie in [0, 1)");
    std::vector<double> p;
    if (cmd.count("--p") && p_flag != "equal") {
      p = parse_csv_doubles(p_flag, "--p");
      double sum = 0.0;
      for (double v : p) {
        if (v < 0.0) throw te::DomainError("sample: --p entries must be non-negative");
        sum += v;
      }
      if (std::fabs(sum - 1.0) > 1e-9)
        throw te::DomainError("sample: --p must sum to 1 (got " + fmt17(sum) + ")");
      if (cmd.count("--r") && r_flag != static_cast<int>(p.size()))
        throw te::DomainError("sample: --r disagrees with the length of --p");
    } else {
      if (!cmd.count("--r") || r_flag < 1)
        throw te::DomainError("sample: equal weights need --r >= 1");
      p.assign(r_flag, 1.0 / r_flag);
    }
    f_values.resize(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) f_values[j] = std::sqrt(g_flag * p[j]);
  }
  if (cmd.count("--count")) count = count_flag;
  if (cmd.count("--seed")) {
    seed = seed_flag;
    have_seed = true;
  }

  if (f_values.empty())
    throw te::DomainError("sample: provide --f, or --g with --p/--r, or a config");
  if (!have_seed) throw te::DomainError("sample: seed is required (no nondeterministic default)");
  if (count < 1) throw te::DomainError("sample: count must be at least 1");

  const te::ParamVector f(f_values);
  const te::ThermalParams params = te::ThermalParams::from_g(f.norm_sq());

  ordered_json cfg;
  cfg["schema"] = 1;
  cfg["command"] = "sample";
  cfg["f"] = f_values;
  cfg["count"] = count;
  cfg["seed"] = seed;

  const std::vector<te::MeasurementSample> rows = te::sample(f, params, count, seed);
  double mean_total = 0.0;
  for (const te::MeasurementSample& row : rows) mean_total += row.n_total();
  mean_total /= double(count);

  OutputTarget out(out_path);
  if (format == "json") {
    ordered_json report;
    report["config"] = cfg;
    ordered_json list = ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ordered_json item;
      item["sample_index"] = i;
      item["n_total"] = rows[i].n_total();
      item["n"] = rows[i].occupations().values();
      list.push_back(std::move(item));
    }
    report["samples"] = std::move(list);
    report["mean_n_total"] = mean_total;
    out.stream() << report.dump(2) << '\n';
    return 0;
  }

  std::string body;
  body.reserve(rows.size() * (8 + 4 * f_values.size()));
  body += "# config: " + cfg.dump() + "\n";
  body += "sample_index,n_total";
  for (std::size_t j = 1; j <= f_values.size(); ++j) body += ",n_" + std::to_string(j);
  body += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    body += std::to_string(i);
    body += ',';
    body += std::to_string(rows[i].n_total());
    for (int v : rows[i].occupations().values()) {
      body += ',';
      body += std::to_string(v);
    }
    body += '\n';
  }
  body += "# mean_n_total = " + fmt17(mean_total) + "\n";
  out.stream() << body;
  return 0;
}

// ---------------------------------------------------------------------------
// fig2

int run_fig2(const CLI::App& cmd, double xi_min_flag, double xi_max_flag, int points_flag,
             bool log_flag, bool linear_flag, const std::string& config_path,
             const std::string& out_path, const std::string& format) {
  double xi_min = 0.05;
  double xi_max = 100.0;
  int points = 60;
  bool log_spacing = true;
  if (!config_path.empty()) {
    const ordered_json file =
        load_config(config_path, "fig2", {"xi_min", "xi_max", "points", "log"});
    if (file.contains("xi_min")) xi_min = file["xi_min"].get<double>();
    if (file.contains("xi_max")) xi_max = file["xi_max"].get<double>();
    if (file.contains("points")) points = file["points"].get<int>();
    if (file.contains("log")) log_spacing = file["log"].get<bool>();
  }
  if (cmd.count("--xi-min")) xi_min = xi_min_flag;
  if (cmd.count("--xi-max")) xi_max = xi_max_flag;
  if (cmd.count("--points")) points = points_flag;
  if (log_flag && linear_flag) throw te::DomainError("fig2: --log excludes --linear");
  if (log_flag) log_spacing = true;
  if (linear_flag) log_spacing = false;

  if (!(xi_min > 0.0) || !std::isfinite(xi_min) || !(xi_max > 0.0) || !std::isfinite(xi_max))
    throw te::DomainError("fig2: xi bounds must be positive and finite");
  if (xi_max < xi_min) throw te::DomainError("fig2: --xi-max must be >= --xi-min");
  if (points < 1) throw te::DomainError("fig2: --points must be at least 1");
  if (points == 1 && xi_max != xi_min)
    throw te::DomainError("fig2: a single point needs --xi-min == --xi-max");

  ordered_json cfg;
  cfg["schema"] = 1;
  cfg["command"] = "fig2";
  cfg["xi_min"] = xi_min;
  cfg["xi_max"] = xi_max;
  cfg["points"] = points;
  cfg["log"] = log_spacing;

  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : double(i) / (points - 1);
    grid[i] = log_spacing ? xi_min * std::pow(xi_max / xi_min, t)
                          : xi_min + (xi_max - xi_min) * t;
  }
  const std::vector<te::Fig2Row> rows = te::fig2_curve(grid);

  OutputTarget out(out_path);
  if (format == "json") {
    ordered_json report;
    report["config"] = cfg;
    report["hbar_omega"] = 1.0;
    ordered_json list = ordered_json::array();
    for (const te::Fig2Row& row : rows) {
      ordered_json item;
      item["xi"] = row.xi;
      item["theta"] = row.theta;
      item["mean_energy"] = row.mean_energy;
      list.push_back(std::move(item));
    }
    report["rows"] = std::move(list);
    out.stream() << report.dump(2) << '\n';
    return 0;
  }

  std::string body;
  body += "# config: " + cfg.dump() + "\n";
  body += "# theta and mean_energy in units of hbar*omega (hbar*omega = 1)\n";
  body += "xi,theta,mean_energy\n";
  for (const te::Fig2Row& row : rows)
    body += fmt17(row.xi) + "," + fmt17(row.theta) + "," + fmt17(row.mean_energy) + "\n";
  out.stream() << body;
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

int run_spectrum(const CLI::App& cmd, int r_flag, double m_flag, double m0_flag, double M_flag,
                 double k_flag, double chi_flag, const std::string& config_path,
                 const std::string& out_path) {
  int r = 1;
  double m = 1.0, m0 = 1.0, M = 1.0, k = 1.0, chi = 1.0;
  if (!config_path.empty()) {
    const ordered_json file =
        load_config(config_path, "spectrum", {"r", "m", "m0", "M", "k", "chi"});
    if (file.contains("r")) r = file["r"].get<int>();
    if (file.contains("m")) m = file["m"].get<double>();
    if (file.contains("m0")) m0 = file["m0"].get<double>();
    if (file.contains("M")) M = file["M"].get<double>();
    if (file.contains("k")) k = file["k"].get<double>();
    if (file.contains("chi")) chi = file["chi"].get<double>();
  }
  if (cmd.count("--r")) r = r_flag;
  if (cmd.count("--m")) m = m_flag;
  if (cmd.count("--m0")) m0 = m0_flag;
  if (cmd.count("--M")) M = M_flag;
  if (cmd.count("--k")) k = k_flag;
  if (cmd.count("--chi")) chi = chi_flag;

  const te::OscillatorSystem sys(r, m, m0, M, k, chi);

  ordered_json cfg;
  cfg["schema"] = 1;
  cfg["command"] = "spectrum";
  cfg["r"] = r;
  cfg["m"] = m;
  cfg["m0"] = m0;
  cfg["M"] = M;
  cfg["k"] = k;
  cfg["chi"] = chi;

  const te::SymMatrix mu = te::mass_matrix(sys);
  const te::SymMatrix kappa = te::stiffness_matrix(sys);
  const te::ModeSet set = te::normal_modes(sys);
  const te::SecularCoefficients coeff = te::secular_coefficients(sys);
  const auto [lambda_1, lambda_2] = te::coupled_lambdas(sys);
  const int n = sys.r + 1;
  const bool soft_mode = set.lambdas.back() <= 1e-12;

  double eigen_residual = 0.0;
  double ortho_residual = 0.0;
  const double kappa_scale = std::max(1.0, kappa.max_norm());
  for (int s = 0; s < n; ++s) {
    const std::vector<double> zs = set.modes.column(s);
    const std::vector<double> kappa_zs = kappa * zs;
    const std::vector<double> mu_zs = mu * zs;
    const double omega_sq = set.lambdas[s] * sys.k / sys.m;
    for (int i = 0; i < n; ++i)
      eigen_residual = std::max(
          eigen_residual, std::fabs(kappa_zs[i] - omega_sq * mu_zs[i]) / kappa_scale);
    for (int j = s + 1; j < n; ++j) {
      const std::vector<double> zj = set.modes.column(j);
      ortho_residual = std::max(ortho_residual, std::fabs(te::dot(zj, mu_zs)) / mu.max_norm());
      ortho_residual =
          std::max(ortho_residual, std::fabs(te::dot(zj, kappa_zs)) / kappa_scale);
    }
  }
  std::vector<double> expected(n, 1.0);
  expected.front() = lambda_1;
  expected.back() = lambda_2;
  std::sort(expected.begin(), expected.end(), std::greater<double>());
  double secular_residual = 0.0;
  for (int s = 0; s < n; ++s)
    secular_residual = std::max(
        secular_residual, std::fabs(set.lambdas[s] - expected[s]) / std::max(1.0, expected[s]));

  ordered_json report;
  report["config"] = cfg;
  report["lambdas"] = set.lambdas;
  ordered_json modes = ordered_json::array();
  for (int s = 0; s < n; ++s) modes.push_back(set.modes.column(s));
  report["modes"] = std::move(modes);
  report["modal_masses"] = set.modal_masses;
  report["modal_rigidities"] = set.modal_rigidities;
  ordered_json secular;
  secular["a"] = coeff.a;
  secular["b"] = coeff.b;
  secular["c"] = coeff.c;
  secular["lambda_1"] = lambda_1;
  secular["lambda_2"] = lambda_2;
  secular["displacement_ratio_1"] = te::displacement_ratio(sys, lambda_1);
  if (soft_mode)
    secular["displacement_ratio_2"] = nullptr;
  else
    secular["displacement_ratio_2"] = te::displacement_ratio(sys, lambda_2);
  report["secular"] = std::move(secular);
  report["soft_mode"] = soft_mode;
  if (soft_mode)
    report["vacuum_matrix"] = nullptr;
  else
    report["vacuum_matrix"] = dense_json(te::vacuum_matrix(sys));
  ordered_json residuals;
  residuals["eigen_equation"] = eigen_residual;
  residuals["orthogonality"] = ortho_residual;
  residuals["secular_vs_modes"] = secular_residual;
  report["residuals"] = std::move(residuals);

  OutputTarget out(out_path);
  out.stream() << report.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int run_verify(const CLI::App& cmd, const std::string& fault_flag, double tol_flag,
               const std::string& config_path, const std::string& out_path) {
  te::VerifyOptions opts;
  if (!config_path.empty()) {
    const ordered_json file = load_config(config_path, "verify", {"fault", "tol"});
    if (file.contains("fault")) opts.fault = file["fault"].get<std::string>();
    if (file.contains("tol") && !file["tol"].is_null())
      opts.tol_override = file["tol"].get<double>();
  }
  if (cmd.count("--fault")) opts.fault = fault_flag;
  if (cmd.count("--tol")) opts.tol_override = tol_flag;
  if (cmd.count("--tol") && !(tol_flag > 0.0))
    throw te::DomainError("verify: --tol must be positive");

  ordered_json cfg;
  cfg["schema"] = 1;
  cfg["command"] = "verify";
  cfg["fault"] = opts.fault;
  if (opts.tol_override >= 0.0)
    cfg["tol"] = opts.tol_override;
  else
    cfg["tol"] = nullptr;

  const std::vector<te::CheckResult> checks = te::run_all_checks(opts);

  ordered_json report;
  report["config"] = cfg;
  ordered_json list = ordered_json::array();
  std::vector<std::string> failures;
  for (const te::CheckResult& check : checks) {
    ordered_json item;
    item["name"] = check.name;
    item["passed"] = check.passed;
    item["residual"] = check.residual;
    item["tolerance"] = check.tolerance;
    item["detail"] = check.detail;
    list.push_back(std::move(item));
    if (!check.passed) failures.push_back(check.name);
  }
  report["checks"] = std::move(list);
  report["passed_count"] = checks.size() - failures.size();
  report["failed_count"] = failures.size();
  report["failures"] = failures;
  report["all_passed"] = failures.empty();

  OutputTarget out(out_path);
  out.stream() << report.dump(2) << '\n';

  if (!failures.empty()) {
    std::string joined;
    for (const std::string& name : failures) {
      if (!joined.empty()) joined += ", ";
      joined += name;
    }
    std::cerr << "verify: failed checks: " << joined << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");

  CLI::App app{
      "Entangled oscillator states, their measurement statistics, and the "
      "partition-coupled oscillator model"};
  app.require_subcommand(1);

  std::string state_f, state_config, state_out, state_format = "json";
  int state_trunc = -1;
  CLI::App* state =
      app.add_subcommand("state", "vacuum form, spectra, covariance, and top weights");
  state->add_option("--f", state_f, "comma-separated parameters f_1,...,f_r");
  state->add_option("--trunc", state_trunc, "total-occupation cap for the weight table");
  state->add_option("--config", state_config, "JSON config file");
  state->add_option("--out", state_out, "output path (default stdout)");
  state->add_option("--format", state_format, "output format")
      ->check(CLI::IsMember({"json"}));

  std::string sample_f, sample_p, sample_config, sample_out, sample_format = "csv";
  double sample_g = 0.0;
  int sample_r = 0;
  std::int64_t sample_count = 1;
  std::uint64_t sample_seed = 0;
  CLI::App* sample = app.add_subcommand("sample", "seeded measurement sampling runs");
  sample->add_option("--f", sample_f, "comma-separated parameters f_1,...,f_r");
  sample->add_option("--g", sample_g, "thermal weight g = f^2");
  sample->add_option("--p", sample_p, "conditional weights: comma-separated or 'equal'");
  sample->add_option("--r", sample_r, "particle count for equal weights");
  sample->add_option("--count", sample_count, "number of samples");
  sample->add_option("--seed", sample_seed, "64-bit stream seed (required)");
  sample->add_option("--config", sample_config, "JSON config file");
  sample->add_option("--out", sample_out, "output path (default stdout)");
  sample->add_option("--format", sample_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  double fig2_xi_min = 0.05, fig2_xi_max = 100.0;
  int fig2_points = 60;
  bool fig2_log = false, fig2_linear = false;
  std::string fig2_config, fig2_out, fig2_format = "csv";
  CLI::App* fig2 = app.add_subcommand("fig2", "temperature and mean energy vs mass ratio");
  fig2->add_option("--xi-min", fig2_xi_min, "smallest mass ratio (> 0)");
  fig2->add_option("--xi-max", fig2_xi_max, "largest mass ratio (> 0)");
  fig2->add_option("--points", fig2_points, "grid size");
  fig2->add_flag("--log", fig2_log, "logarithmic grid (default)");
  fig2->add_flag("--linear", fig2_linear, "linear grid");
  fig2->add_option("--config", fig2_config, "JSON config file");
  fig2->add_option("--out", fig2_out, "output path (default stdout)");
  fig2->add_option("--format", fig2_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  int spectrum_r = 1;
  double spectrum_m = 1.0, spectrum_m0 = 1.0, spectrum_M = 1.0, spectrum_k = 1.0,
         spectrum_chi = 1.0;
  std::string spectrum_config, spectrum_out, spectrum_format = "json";
  CLI::App* spectrum =
      app.add_subcommand("spectrum", "normal modes of the coupled oscillator system");
  spectrum->add_option("--r", spectrum_r, "number of primary oscillators");
  spectrum->add_option("--m", spectrum_m, "primary oscillator mass");
  spectrum->add_option("--m0", spectrum_m0, "partition mass");
  spectrum->add_option("--M", spectrum_M, "detector mass");
  spectrum->add_option("--k", spectrum_k, "primary rigidity");
  spectrum->add_option("--chi", spectrum_chi, "detector rigidity (>= 0)");
  spectrum->add_option("--config", spectrum_config, "JSON config file");
  spectrum->add_option("--out", spectrum_out, "output path (default stdout)");
  spectrum->add_option("--format", spectrum_format, "output format")
      ->check(CLI::IsMember({"json"}));

  std::string verify_fault, verify_config, verify_out, verify_format = "json";
  double verify_tol = -1.0;
  CLI::App* verify = app.add_subcommand("verify", "run the full verification suite");
  verify->add_option("--fault", verify_fault, "inject a named fault (negative control)");
  verify->add_option("--tol", verify_tol, "override every check tolerance");
  verify->add_option("--config", verify_config, "JSON config file");
  verify->add_option("--out", verify_out, "output path (default stdout)");
  verify->add_option("--format", verify_format, "output format")
      ->check(CLI::IsMember({"json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (state->parsed())
      return run_state(*state, state_f, state_trunc, state_config, state_out);
    if (sample->parsed())
      return run_sample(*sample, sample_f, sample_g, sample_p, sample_r, sample_count,
                        sample_seed, sample_config, sample_out, sample_format);
    if (fig2->parsed())
      return run_fig2(*fig2, fig2_xi_min, fig2_xi_max, fig2_points, fig2_log, fig2_linear,
                      fig2_config, fig2_out, fig2_format);
    if (spectrum->parsed())
      return run_spectrum(*spectrum, spectrum_r, spectrum_m, spectrum_m0, spectrum_M,
                          spectrum_k, spectrum_chi, spectrum_config, spectrum_out);
    if (verify->parsed())
      return run_verify(*verify, verify_fault, verify_tol, verify_config, verify_out);
  } catch (const te::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const te::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

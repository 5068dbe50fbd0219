#include "suscept/scan.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "suscept/dynamics.hpp"
#include "suscept/sensitivity.hpp"

namespace suscept {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr std::string_view kEmitNames[] = {kEmitEigenvalues, kEmitEigenvectors, kEmitPredictions,
                                           kEmitCycles,      kEmitSummary,      kEmitOracleChecks};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_value(std::string_view field, std::string_view text) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(field), "cannot parse '" + std::string(text) + "'");
  }
  return value;
}

double elapsed_seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// |Phi(1) F(z0) - F(z0)| / |F(z0)|: the flow direction carries multiplier 1.
double floquet_defect(const SensitivityBundle& bundle) {
  const Vector& end = bundle.end_state();
  const auto ip = bundle.layout().phi();
  Matrix2 phi;
  phi << end[ip], end[ip + 2], end[ip + 1], end[ip + 3];
  const State f = VanDerPolField(bundle.config()).rhs(bundle.cycle().anchor);
  const Eigen::Vector2d flow{f.x, f.y};
  return (phi * flow - flow).norm() / flow.norm();
}

double max_unflagged_identity_defect(const Eigen::MatrixXd& gram, const EigenSystem& es) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < gram.rows(); ++j) {
    if (es.flagged[static_cast<std::size_t>(j)]) continue;
    for (Eigen::Index k = 0; k < gram.cols(); ++k) {
      if (es.flagged[static_cast<std::size_t>(k)]) continue;
      worst = std::max(worst, std::abs(gram(j, k) - (j == k ? 1.0 : 0.0)));
    }
  }
  return worst;
}

Json number_array(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json config_json(const ScanConfig& cfg) {
  Json c;
  c["mu"] = cfg.mu_values;
  c["order"] = cfg.order;
  c["rtol"] = cfg.rtol;
  c["atol"] = cfg.atol;
  c["output_dir"] = cfg.output_dir.string();
  c["emit"] = cfg.emit;
  c["jobs"] = cfg.jobs;
  c["uniform_points"] = cfg.uniform_points;
  return c;
}

Json point_json(const PointResult& p, const std::vector<PerturbationIndex>& indices) {
  Json j;
  j["mu"] = p.mu;
  j["status"] = p.ok ? "ok" : "failed";
  j["wall_seconds"] = p.wall_seconds;
  if (!p.ok) {
    j["failure"] = {{"kind", p.failure_kind}, {"message", p.failure}};
    return j;
  }
  j["period"] = p.cycle.period;
  j["residual"] = p.cycle.residual;
  j["anchor"] = {p.cycle.anchor.x, p.cycle.anchor.y};
  j["steps"] = p.steps;
  j["spread"] = p.spectrum.spread();
  j["noise_floor"] = p.spectrum.noise_floor;
  j["eigenvalues"] = number_array(p.spectrum.eigenvalues);
  j["flagged"] = p.spectrum.flagged;
  Json params = Json::array();
  for (const auto& idx : indices) params.push_back({idx.m, idx.n});
  j["corrections"] = {{"parameters", params},
                      {"dx0_da", number_array(p.corrections.dx0_da)},
                      {"dT_da", number_array(p.corrections.dT_da)}};
  const auto& d = p.diagnostics;
  j["diagnostics"] = {{"floquet_defect", d.floquet_defect},
                      {"route_discrepancy", d.route_discrepancy},
                      {"min_eigenvalue_ratio", d.min_eigenvalue_ratio},
                      {"j0_defect", d.j0_defect},
                      {"j1_defect", d.j1_defect},
                      {"orthonormality_error", d.orthonormality_error}};
  j["amplitude"] = p.amplitude;
  j["jump_fraction"] = p.jump_fraction;
  j["eta"] = p.eta;
  return j;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::string_view header) : out_(path) {
    if (!out_) throw ConfigError("output_dir", "cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }
  CsvFile& operator<<(double v) {
    sep();
    out_ << format_number(v);
    return *this;
  }
  CsvFile& operator<<(long long v) {
    sep();
    out_ << v;
    return *this;
  }
  CsvFile& operator<<(std::string_view v) {
    sep();
    out_ << v;
    return *this;
  }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }
  std::ofstream out_;
  bool first_ = true;
};

long long rank_of(Eigen::Index k) { return static_cast<long long>(k) + 1; }

}  // namespace

std::vector<double> default_mu_grid() {
  std::vector<double> mu;
  for (int i = 0; i <= 12; ++i) mu.push_back(std::pow(10.0, 2.0 * i / 12.0));
  return mu;
}

void ScanConfig::validate() const {
  if (mu_values.empty()) throw ConfigError("mu", "at least one value is required");
  for (std::size_t i = 0; i < mu_values.size(); ++i) {
    if (!(std::isfinite(mu_values[i]) && mu_values[i] > 0.0)) {
      throw ConfigError("mu", "values must be positive and finite");
    }
    if (i > 0 && !(mu_values[i] > mu_values[i - 1])) {
      throw ConfigError("mu", "values must be strictly increasing");
    }
  }
  if (order < 1 || order > 16) throw ConfigError("order", "must lie in [1, 16]");
  if (!(rtol >= 1e-14 && rtol <= 1e-2)) throw ConfigError("rtol", "must lie in [1e-14, 1e-2]");
  if (!(atol >= 1e-16 && atol <= 1e-2)) throw ConfigError("atol", "must lie in [1e-16, 1e-2]");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  for (const auto& e : emit) {
    if (std::find(std::begin(kEmitNames), std::end(kEmitNames), e) == std::end(kEmitNames)) {
      throw ConfigError("emit", "unknown output '" + e + "'");
    }
  }
  if (uniform_points < 2) throw ConfigError("uniform_points", "must be at least 2");
}

IntegratorSettings ScanConfig::integrator() const {
  IntegratorSettings s;
  s.rtol = rtol;
  s.atol = atol;
  return s;
}

double ScanConfig::relative_floor() const {
  const double f = 10.0 * std::max(rtol, atol);
  return f * f;
}

void apply_setting(ScanConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "mu") {
    cfg.mu_values.clear();
    for (auto item : split_list(value)) cfg.mu_values.push_back(parse_value<double>(key, item));
  } else if (key == "order") {
    cfg.order = parse_value<int>(key, value);
  } else if (key == "rtol") {
    cfg.rtol = parse_value<double>(key, value);
  } else if (key == "atol") {
    cfg.atol = parse_value<double>(key, value);
  } else if (key == "output_dir") {
    cfg.output_dir = std::filesystem::path(std::string(value));
  } else if (key == "emit") {
    cfg.emit.clear();
    for (auto item : split_list(value)) cfg.emit.emplace(item);
  } else if (key == "jobs") {
    cfg.jobs = parse_value<unsigned>(key, value);
  } else if (key == "uniform_points") {
    cfg.uniform_points = parse_value<std::size_t>(key, value);
  } else {
    throw ConfigError(std::string(key), "unknown configuration key");
  }
}

ScanConfig parse_config(std::istream& in) {
  ScanConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    }
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

ScanConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  return parse_config(in);
}

std::string format_config(const ScanConfig& cfg) {
  std::ostringstream out;
  out << "mu = ";
  for (std::size_t i = 0; i < cfg.mu_values.size(); ++i) out << (i ? ", " : "") << format_number(cfg.mu_values[i]);
  out << "\norder = " << cfg.order;
  out << "\nrtol = " << format_number(cfg.rtol);
  out << "\natol = " << format_number(cfg.atol);
  out << "\noutput_dir = " << cfg.output_dir.string();
  out << "\nemit = ";
  bool first = true;
  for (const auto& e : cfg.emit) {
    out << (first ? "" : ", ") << e;
    first = false;
  }
  out << "\njobs = " << cfg.jobs;
  out << "\nuniform_points = " << cfg.uniform_points << '\n';
  return out.str();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

PointResult analyze_point(double mu, const ScanConfig& cfg) {
  const auto start = Clock::now();
  PointResult r;
  r.mu = mu;
  try {
    const ModelConfig model{mu, cfg.order};
    model.validate();
    const IntegratorSettings settings = cfg.integrator();

    r.cycle = find_limit_cycle(model, ParameterVector::zeros(cfg.order), settings);
    const SensitivityBundle bundle = integrate_variational(r.cycle, model, settings);
    r.steps = bundle.trajectory().steps().size();
    r.corrections = solve_corrections(bundle);

    const JacobianSamples samples = sample_jacobian(bundle, r.corrections);
    r.spectrum = jacobian_spectrum(samples, cfg.relative_floor());
    r.hessian = hessian_from_samples(samples, mu, cfg.order).entries;

    auto& d = r.diagnostics;
    const double lead = r.spectrum.eigenvalues[0];
    const Hessian gram_route = assemble_hessian(bundle, r.corrections);
    d.route_discrepancy = hessian_route_discrepancy(gram_route, Hessian{r.hessian, mu, cfg.order});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eigs(gram_route.entries, Eigen::EigenvaluesOnly);
    d.min_eigenvalue_ratio = gram_eigs.eigenvalues().minCoeff() / lead;
    d.floquet_defect = floquet_defect(bundle);
    const double jscale = std::sqrt(r.hessian.diagonal().maxCoeff());
    d.j0_defect = total_jacobian(bundle, r.corrections, 0.0).cwiseAbs().maxCoeff() / jscale;
    d.j1_defect = total_jacobian(bundle, r.corrections, 1.0).cwiseAbs().maxCoeff() / jscale;
    d.orthonormality_error = max_unflagged_identity_defect(prediction_gram(samples, r.spectrum), r.spectrum);

    const auto full = eigenpredictions(bundle, r.corrections, r.spectrum, output_grid(bundle, cfg.uniform_points));
    for (const auto& p : full) {
      r.amplitude.push_back(p.amplitude);
      r.jump_fraction.push_back(jump_localized_fraction(bundle, p));
      r.eta.push_back(default_eta(bundle, p));
    }

    if (cfg.emits(kEmitPredictions) || cfg.emits(kEmitCycles)) {
      const auto grid = output_grid(bundle, cfg.uniform_points, cfg.uniform_points);
      r.predictions = eigenpredictions(bundle, r.corrections, r.spectrum, grid);
      if (cfg.emits(kEmitCycles)) {
        for (const auto& p : r.predictions) {
          r.cycles.push_back(eigencycle(bundle, p, r.eta[static_cast<std::size_t>(p.rank)]));
        }
      }
      if (!cfg.emits(kEmitPredictions)) r.predictions.clear();
    }
    r.ok = true;
  } catch (const Error& e) {
    r.failure_kind = std::string(to_string(e.kind()));
    r.failure = e.what();
  } catch (const std::exception& e) {
    r.failure_kind = "Unexpected";
    r.failure = e.what();
  }
  r.wall_seconds = elapsed_seconds(start);
  return r;
}

std::vector<OracleCheck> run_oracle_checks(const ScanConfig& cfg) {
  const ModelConfig model{1.0, cfg.order};
  const IntegratorSettings settings = cfg.integrator();
  const int order = cfg.order;
  std::vector<OracleCheck> checks;

  auto add = [&](std::string name, double value, double reference, double error, double tol) {
    checks.push_back({std::move(name), value, reference, error, tol, error <= tol});
  };

  const LimitCycle ref = find_limit_cycle(model, ParameterVector::zeros(order), settings);
  add("period_mu1", ref.period, 6.663, std::abs(ref.period - 6.663), 1e-3);

  const SensitivityBundle bundle = integrate_variational(ref, model, settings);
  const CorrectionCoefficients corr = solve_corrections(bundle);
  const JacobianSamples samples = sample_jacobian(bundle, corr);
  const EigenSystem spectrum = jacobian_spectrum(samples, cfg.relative_floor());
  const Eigen::MatrixXd hessian = hessian_from_samples(samples, 1.0, order).entries;

  add("floquet_unit_multiplier", floquet_defect(bundle), 0.0, floquet_defect(bundle), 1e-6);

  // Central differences of settled, re-anchored cycles.
  const double h_fd = 1e-4;
  auto shifted = [&](std::size_t alpha, double h) {
    const ParameterVector a = ParameterVector::unit(order, alpha, h);
    const State anchor = settle(model, a, ref.anchor, settings);
    return measure_period(model, a, anchor, settings);
  };
  const double dT_scale = corr.dT_da.cwiseAbs().maxCoeff();
  for (std::size_t alpha : {std::size_t{0}, std::size_t{1}}) {
    const LimitCycle plus = shifted(alpha, h_fd);
    const LimitCycle minus = shifted(alpha, -h_fd);
    const auto idx = enumerate_parameters(order)[alpha];
    const std::string tag = "a" + std::to_string(idx.m) + std::to_string(idx.n);
    const double dT = (plus.period - minus.period) / (2.0 * h_fd);
    const double an = corr.dT_da[static_cast<Eigen::Index>(alpha)];
    // dT/da00 vanishes by the x -> -x symmetry, so errors are relative to max |dT/da|.
    add("period_fd_" + tag, an, dT, std::abs(an - dT) / dT_scale, 1e-3);
    if (alpha == 1) {
      const double dx = (plus.anchor.x - minus.anchor.x) / (2.0 * h_fd);
      const double ax = corr.dx0_da[1];
      add("anchor_fd_" + tag, ax, dx, std::abs(ax - dx) / std::abs(dx), 1e-3);
    }
  }

  const Eigen::Index modes = std::min<Eigen::Index>(3, spectrum.size());
  for (Eigen::Index k = 0; k < modes; ++k) {
    const double lambda = spectrum.eigenvalues[k];
    const double h = 1e-3 / std::sqrt(lambda);
    ParameterVector a = ParameterVector::zeros(order);
    a.values = h * spectrum.eigenvectors.col(k);
    const double cost = cost_oracle(model, a, ref, settings);
    const double predicted = 0.5 * lambda * h * h;
    add("cost_oracle_mode" + std::to_string(k + 1), cost, predicted, std::abs(cost / predicted - 1.0), 0.10);
  }

  const std::size_t slow = std::min<std::size_t>(static_cast<std::size_t>(order) + 1, 5);
  for (std::size_t alpha = 0; alpha < slow; ++alpha) {
    const double h = 1e-4;
    const double cost = cost_oracle(model, ParameterVector::unit(order, alpha, h), ref, settings);
    const double fd = 2.0 * cost / (h * h);
    const double hii = hessian(static_cast<Eigen::Index>(alpha), static_cast<Eigen::Index>(alpha));
    add("cost_oracle_diag_a0" + std::to_string(alpha), hii, fd, std::abs(fd / hii - 1.0), 0.05);
  }
  return checks;
}

std::string format_oracle_checks(const std::vector<OracleCheck>& checks) {
  std::ostringstream out;
  out << std::left << std::setw(26) << "check" << std::setw(16) << "value" << std::setw(16) << "reference"
      << std::setw(12) << "error" << std::setw(10) << "tol"
      << "result\n";
  for (const auto& c : checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%-26s%-16.9g%-16.9g%-12.3e%-10.1e%s\n", c.name.c_str(), c.value, c.reference,
                  c.error, c.tolerance, c.passed ? "PASS" : "FAIL");
    out << line;
  }
  return out.str();
}

bool ScanReport::all_ok() const {
  return std::all_of(points.begin(), points.end(), [](const PointResult& p) { return p.ok; });
}

ScanReport compute_scan(const ScanConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  const auto start = Clock::now();
  const std::size_t n = cfg.mu_values.size();
  unsigned workers = cfg.jobs != 0 ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

  ScanReport report;
  report.config = cfg;
  report.points.resize(n);
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      report.points[i] = analyze_point(cfg.mu_values[i], cfg);
      if (progress) {
        const std::lock_guard lock(progress_mutex);
        progress(report.points[i]);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  std::vector<double> mu;
  std::vector<EigenSystem> spectra;
  for (const auto& p : report.points) {
    if (!p.ok) continue;
    mu.push_back(p.mu);
    spectra.push_back(p.spectrum);
  }
  report.slopes = fit_power_laws(mu, spectra, report.slope_mu_lo, report.slope_mu_hi);
  report.spread_growth = spectra.size() >= 2 ? spectra.back().spread() / spectra.front().spread()
                                             : std::numeric_limits<double>::quiet_NaN();
  if (cfg.emits(kEmitOracleChecks)) report.oracle_checks = run_oracle_checks(cfg);
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

void prepare_output_dir(const ScanConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError("output_dir", "cannot create " + cfg.output_dir.string() + ": " + ec.message());
  const auto probe = cfg.output_dir / ".suscept-write-test";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError("output_dir", cfg.output_dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void write_outputs(const ScanReport& report) {
  const auto& cfg = report.config;
  const auto& dir = cfg.output_dir;
  const auto indices = enumerate_parameters(cfg.order);

  if (cfg.emits(kEmitEigenvalues)) {
    CsvFile f(dir / "eigenvalues.csv", "mu,rank,lambda,flagged");
    for (const auto& p : report.points) {
      if (!p.ok) continue;
      for (Eigen::Index k = 0; k < p.spectrum.size(); ++k) {
        f << p.mu << rank_of(k) << p.spectrum.eigenvalues[k]
          << static_cast<long long>(p.spectrum.flagged[static_cast<std::size_t>(k)]);
        f.end_row();
      }
    }
  }
  if (cfg.emits(kEmitEigenvectors)) {
    CsvFile f(dir / "eigenvectors.csv", "mu,rank,m,n,component");
    for (const auto& p : report.points) {
      if (!p.ok) continue;
      for (Eigen::Index k = 0; k < p.spectrum.size(); ++k) {
        for (std::size_t a = 0; a < indices.size(); ++a) {
          f << p.mu << rank_of(k) << static_cast<long long>(indices[a].m) << static_cast<long long>(indices[a].n)
            << p.spectrum.eigenvectors(static_cast<Eigen::Index>(a), k);
          f.end_row();
        }
      }
    }
  }
  if (cfg.emits(kEmitPredictions)) {
    CsvFile f(dir / "predictions.csv", "mu,rank,tau,delta_y");
    for (const auto& p : report.points) {
      for (const auto& ep : p.predictions) {
        if (ep.flagged) continue;
        for (std::size_t i = 0; i < ep.tau.size(); ++i) {
          f << p.mu << rank_of(ep.rank) << ep.tau[i] << ep.delta_y[i];
          f.end_row();
        }
      }
    }
  }
  if (cfg.emits(kEmitCycles)) {
    CsvFile f(dir / "cycles.csv", "mu,rank,tau,x,y_perturbed,y_unperturbed,eta");
    for (const auto& p : report.points) {
      for (const auto& c : p.cycles) {
        if (p.spectrum.flagged[static_cast<std::size_t>(c.rank)]) continue;
        for (std::size_t i = 0; i < c.tau.size(); ++i) {
          f << p.mu << rank_of(c.rank) << c.tau[i] << c.x[i] << c.y_perturbed[i] << c.y_unperturbed[i] << c.eta;
          f.end_row();
        }
      }
    }
  }
  if (cfg.emits(kEmitOracleChecks)) {
    CsvFile f(dir / "oracle_checks.csv", "check,value,reference,error,tolerance,passed");
    for (const auto& c : report.oracle_checks) {
      f << c.name << c.value << c.reference << c.error << c.tolerance << static_cast<long long>(c.passed);
      f.end_row();
    }
  }
  if (cfg.emits(kEmitSummary)) {
    std::ofstream out(dir / "summary.json");
    if (!out) throw ConfigError("output_dir", "cannot open summary.json for writing");
    out << summary_json(report) << '\n';
  }
}

ScanReport run_scan(const ScanConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  prepare_output_dir(cfg);
  ScanReport report = compute_scan(cfg, progress);
  write_outputs(report);
  return report;
}

std::string summary_json(const ScanReport& report) {
  const auto indices = enumerate_parameters(report.config.order);
  Json doc;
  doc["provenance"] = {{"tool", "suscept"},
                       {"version", "0.1.0"},
                       {"config", config_json(report.config)},
                       {"relative_noise_floor", report.config.relative_floor()},
                       {"wall_seconds", report.wall_seconds}};

  Json points = Json::array();
  for (const auto& p : report.points) points.push_back(point_json(p, indices));
  doc["points"] = std::move(points);

  Json by_rank = Json::object();
  for (std::size_t k = 0; k < report.slopes.slope.size(); ++k) {
    by_rank[std::to_string(k + 1)] = {{"slope", report.slopes.slope[k]},
                                      {"intercept", report.slopes.intercept[k]},
                                      {"points", report.slopes.points[k]}};
  }
  doc["slopes"] = {{"mu_range", {report.slope_mu_lo, report.slope_mu_hi}}, {"by_rank", std::move(by_rank)}};

  const PointResult* first = nullptr;
  const PointResult* last = nullptr;
  for (const auto& p : report.points) {
    if (!p.ok) continue;
    if (!first) first = &p;
    last = &p;
  }
  if (first && last && first != last) {
    doc["spread_growth"] = {{"mu_from", first->mu}, {"mu_to", last->mu}, {"factor", report.spread_growth}};
  } else {
    doc["spread_growth"] = nullptr;
  }

  if (!report.oracle_checks.empty()) {
    Json checks = Json::array();
    for (const auto& c : report.oracle_checks) {
      checks.push_back({{"check", c.name},
                        {"value", c.value},
                        {"reference", c.reference},
                        {"error", c.error},
                        {"tolerance", c.tolerance},
                        {"passed", c.passed}});
    }
    doc["oracle_checks"] = std::move(checks);
  }
  doc["all_ok"] = report.all_ok();
  return doc.dump(2);
}

ScanConfig config_from_summary(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ConfigError("summary", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.contains("provenance") || !doc["provenance"].contains("config")) {
    throw ConfigError("provenance", "summary has no provenance.config block");
  }
  const Json& c = doc["provenance"]["config"];
  ScanConfig cfg;
  try {
    cfg.mu_values = c.at("mu").get<std::vector<double>>();
    cfg.order = c.at("order").get<int>();
    cfg.rtol = c.at("rtol").get<double>();
    cfg.atol = c.at("atol").get<double>();
    cfg.output_dir = c.at("output_dir").get<std::string>();
    cfg.emit = c.at("emit").get<std::set<std::string>>();
    cfg.jobs = c.at("jobs").get<unsigned>();
    cfg.uniform_points = c.at("uniform_points").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw ConfigError("provenance", e.what());
  }
  return cfg;
}

}  // namespace suscept

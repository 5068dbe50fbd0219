// suscept: mu scans of the structural susceptibility of the van der Pol
// relaxation oscillator.
//
//   suscept scan --config <file> [--mu <list>] [--order <N>] [--rtol <r>]
//                [--atol <a>] [--out <dir>] [--jobs <k>] [--emit <list>]
//   suscept validate [--config <file>]
//
// Exit codes: 0 success, 1 partial failure, 2 configuration error.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "suscept/scan.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string config;
  std::optional<std::string> mu;
  std::optional<std::string> order;
  std::optional<std::string> rtol;
  std::optional<std::string> atol;
  std::optional<std::string> out;
  std::optional<std::string> jobs;
  std::optional<std::string> emit;
};

suscept::ScanConfig resolve(const Overrides& o) {
  suscept::ScanConfig cfg = o.config.empty() ? suscept::ScanConfig{} : suscept::load_config(o.config);
  auto apply = [&](const char* key, const std::optional<std::string>& v) {
    if (v) suscept::apply_setting(cfg, key, *v);
  };
  apply("mu", o.mu);
  apply("order", o.order);
  apply("rtol", o.rtol);
  apply("atol", o.atol);
  apply("output_dir", o.out);
  apply("jobs", o.jobs);
  apply("emit", o.emit);
  cfg.validate();
  return cfg;
}

void report_point(const suscept::PointResult& p) {
  if (p.ok) {
    std::fprintf(stderr, "mu = %-10.6g ok      T = %.10f  spread = %.3e  (%.1f s)\n", p.mu, p.cycle.period,
                 p.spectrum.spread(), p.wall_seconds);
  } else {
    std::fprintf(stderr, "mu = %-10.6g FAILED  %s  (%.1f s)\n", p.mu, p.failure.c_str(), p.wall_seconds);
  }
}

int run_scan(const Overrides& o) {
  const suscept::ScanConfig cfg = resolve(o);
  const suscept::ScanReport report = suscept::run_scan(cfg, report_point);

  std::size_t failed = 0;
  for (const auto& p : report.points) failed += p.ok ? 0 : 1;
  std::fprintf(stderr, "%zu/%zu mu points succeeded in %.1f s; spread growth %.3e; output in %s\n",
               report.points.size() - failed, report.points.size(), report.wall_seconds, report.spread_growth,
               cfg.output_dir.string().c_str());
  if (!report.oracle_checks.empty()) std::fputs(suscept::format_oracle_checks(report.oracle_checks).c_str(), stdout);
  return failed == 0 ? kExitOk : kExitPartial;
}

int run_validate(const Overrides& o) {
  const suscept::ScanConfig cfg = resolve(o);
  const auto checks = suscept::run_oracle_checks(cfg);
  std::fputs(suscept::format_oracle_checks(checks).c_str(), stdout);
  bool all = true;
  for (const auto& c : checks) all = all && c.passed;
  return all ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural susceptibility scans of the van der Pol oscillator"};
  app.require_subcommand(1);

  Overrides scan_opts;
  auto* scan = app.add_subcommand("scan", "Run the mu scan and write CSV/JSON results");
  scan->add_option("--config", scan_opts.config, "Flat key = value configuration file")->required();
  scan->add_option("--mu", scan_opts.mu, "Comma-separated mu values");
  scan->add_option("--order", scan_opts.order, "Perturbation order N");
  scan->add_option("--rtol", scan_opts.rtol, "Relative integration tolerance");
  scan->add_option("--atol", scan_opts.atol, "Absolute integration tolerance");
  scan->add_option("--out", scan_opts.out, "Output directory");
  scan->add_option("--jobs", scan_opts.jobs, "Worker threads (0 = all processors)");
  scan->add_option("--emit", scan_opts.emit,
                   "Comma-separated subset of eigenvalues,eigenvectors,predictions,cycles,summary,oracle-checks");

  Overrides validate_opts;
  auto* validate = app.add_subcommand("validate", "Run the finite-difference and cost oracle checks at mu = 1");
  validate->add_option("--config", validate_opts.config, "Flat key = value configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*scan) return run_scan(scan_opts);
    return run_validate(validate_opts);
  } catch (const suscept::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPartial;
  }
}

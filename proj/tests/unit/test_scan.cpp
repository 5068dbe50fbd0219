#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "suscept/scan.hpp"

namespace {

namespace fs = std::filesystem;
using suscept::ConfigError;
using suscept::ScanConfig;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("suscept-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n == 0 ? 0 : n - 1;
}

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return {};
}

TEST(ScanConfig, Defaults) {
  const ScanConfig cfg;
  ASSERT_EQ(cfg.mu_values.size(), 13u);
  EXPECT_EQ(cfg.mu_values.front(), 1.0);
  EXPECT_EQ(cfg.mu_values.back(), 100.0);
  EXPECT_NEAR(cfg.mu_values[1], 1.4677992676220695, 1e-15);
  EXPECT_EQ(cfg.order, 4);
  EXPECT_EQ(cfg.rtol, 1e-10);
  EXPECT_EQ(cfg.atol, 1e-12);
  EXPECT_FALSE(cfg.emits(suscept::kEmitOracleChecks));
  EXPECT_TRUE(cfg.emits(suscept::kEmitSummary));
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.relative_floor(), 1e-18);
}

TEST(ScanConfig, ParsesFlatFile) {
  std::istringstream in(
      "# scan\n"
      "mu = 1, 2.5 ,10   # trailing comment\n"
      "\n"
      "order=2\n"
      "rtol = 1e-9\n"
      "atol = 1e-11\n"
      "output_dir = /tmp/x y\n"
      "emit = eigenvalues, summary\n"
      "jobs = 3\n"
      "uniform_points = 11\n");
  const ScanConfig cfg = suscept::parse_config(in);
  EXPECT_EQ(cfg.mu_values, (std::vector<double>{1.0, 2.5, 10.0}));
  EXPECT_EQ(cfg.order, 2);
  EXPECT_EQ(cfg.rtol, 1e-9);
  EXPECT_EQ(cfg.atol, 1e-11);
  EXPECT_EQ(cfg.output_dir, fs::path("/tmp/x y"));
  EXPECT_EQ(cfg.emit, (std::set<std::string>{"eigenvalues", "summary"}));
  EXPECT_EQ(cfg.jobs, 3u);
  EXPECT_EQ(cfg.uniform_points, 11u);
}

TEST(ScanConfig, ErrorsNameTheField) {
  EXPECT_EQ(field_of([] {
              std::istringstream in("colour = red\n");
              (void)suscept::parse_config(in);
            }),
            "colour");
  EXPECT_EQ(field_of([] {
              std::istringstream in("order = four\n");
              (void)suscept::parse_config(in);
            }),
            "order");
  EXPECT_EQ(field_of([] {
              std::istringstream in("just text\n");
              (void)suscept::parse_config(in);
            }),
            "line 1");

  auto invalid = [](auto mutate) {
    ScanConfig cfg;
    mutate(cfg);
    return field_of([&] { cfg.validate(); });
  };
  EXPECT_EQ(invalid([](ScanConfig& c) { c.mu_values = {1.0, 1.0}; }), "mu");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.mu_values = {2.0, 1.0}; }), "mu");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.mu_values = {-1.0}; }), "mu");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.mu_values.clear(); }), "mu");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.order = 0; }), "order");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.rtol = 1e-1; }), "rtol");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.atol = 0.0; }), "atol");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.emit = {"plots"}; }), "emit");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.output_dir.clear(); }), "output_dir");
  EXPECT_EQ(invalid([](ScanConfig& c) { c.uniform_points = 1; }), "uniform_points");
}

TEST(ScanConfig, FormatParseRoundTrip) {
  ScanConfig cfg;
  cfg.mu_values = {1.0 / 3.0, 2.0, 77.7};
  cfg.order = 3;
  cfg.rtol = 3e-11;
  cfg.emit = {"cycles", "eigenvalues"};
  cfg.jobs = 2;
  std::istringstream in(suscept::format_config(cfg));
  EXPECT_EQ(suscept::parse_config(in), cfg);
}

TEST(ScanConfig, OutputDirMustBeWritable) {
  ScanConfig cfg;
  const auto blocker = scratch("blocker");
  std::ofstream(blocker) << "file, not a directory";
  cfg.output_dir = blocker / "sub";
  EXPECT_EQ(field_of([&] { suscept::prepare_output_dir(cfg); }), "output_dir");
  fs::remove(blocker);
}

TEST(Scan, SmallScanFilesAndRoundTrip) {
  ScanConfig cfg;
  cfg.mu_values = {1.0, 3.0};
  cfg.order = 2;
  cfg.uniform_points = 51;
  cfg.output_dir = scratch("small");
  const auto report = suscept::run_scan(cfg);
  ASSERT_TRUE(report.all_ok());

  // order 2 gives five eigenvalues per mu
  EXPECT_EQ(data_rows(cfg.output_dir / "eigenvalues.csv"), 2u * 5u);
  EXPECT_EQ(data_rows(cfg.output_dir / "eigenvectors.csv"), 2u * 5u * 5u);
  std::ifstream ev(cfg.output_dir / "eigenvalues.csv");
  std::string header, row;
  std::getline(ev, header);
  std::getline(ev, row);
  EXPECT_EQ(header, "mu,rank,lambda,flagged");
  EXPECT_EQ(row.substr(0, 25), "1.0000000000000000e+00,1,");

  std::ifstream pr(cfg.output_dir / "predictions.csv");
  std::getline(pr, header);
  EXPECT_EQ(header, "mu,rank,tau,delta_y");
  std::ifstream cy(cfg.output_dir / "cycles.csv");
  std::getline(cy, header);
  EXPECT_EQ(header, "mu,rank,tau,x,y_perturbed,y_unperturbed,eta");
  std::ifstream vv(cfg.output_dir / "eigenvectors.csv");
  std::getline(vv, header);
  EXPECT_EQ(header, "mu,rank,m,n,component");

  const std::string summary = slurp(cfg.output_dir / "summary.json");
  EXPECT_EQ(suscept::config_from_summary(summary), cfg);
  EXPECT_NE(summary.find("\"slopes\""), std::string::npos);
  EXPECT_NE(summary.find("\"dT_da\""), std::string::npos);
  fs::remove_all(cfg.output_dir);
}

TEST(Scan, ByteIdenticalAcrossRunsAndJobCounts) {
  ScanConfig a;
  a.mu_values = {1.0, 2.0, 5.0};
  a.order = 2;
  a.uniform_points = 21;
  a.jobs = 1;
  a.output_dir = scratch("det-a");
  ScanConfig b = a;
  b.jobs = 3;
  b.output_dir = scratch("det-b");
  (void)suscept::run_scan(a);
  (void)suscept::run_scan(b);
  for (const char* f : {"eigenvalues.csv", "eigenvectors.csv", "predictions.csv", "cycles.csv"}) {
    EXPECT_EQ(slurp(a.output_dir / f), slurp(b.output_dir / f)) << f;
  }
  fs::remove_all(a.output_dir);
  fs::remove_all(b.output_dir);
}

TEST(Scan, FailureAtOneMuIsIsolated) {
  // At mu = 0.003 attraction is too weak to settle within 200 returns.
  ScanConfig cfg;
  cfg.mu_values = {0.003, 1.0};
  cfg.order = 2;
  cfg.uniform_points = 11;
  cfg.output_dir = scratch("isolate");
  const auto report = suscept::run_scan(cfg);
  ASSERT_EQ(report.points.size(), 2u);
  EXPECT_FALSE(report.points[0].ok);
  EXPECT_EQ(report.points[0].failure_kind, "NoConvergence");
  EXPECT_TRUE(report.points[1].ok);
  EXPECT_FALSE(report.all_ok());
  EXPECT_EQ(data_rows(cfg.output_dir / "eigenvalues.csv"), 5u);
  const std::string summary = slurp(cfg.output_dir / "summary.json");
  EXPECT_NE(summary.find("\"failed\""), std::string::npos);
  EXPECT_NE(summary.find("NoConvergence"), std::string::npos);
  fs::remove_all(cfg.output_dir);
}

TEST(Scan, EmitSubset) {
  ScanConfig cfg;
  cfg.mu_values = {2.0};
  cfg.order = 1;
  cfg.emit = {"eigenvalues"};
  cfg.output_dir = scratch("subset");
  (void)suscept::run_scan(cfg);
  EXPECT_TRUE(fs::exists(cfg.output_dir / "eigenvalues.csv"));
  EXPECT_FALSE(fs::exists(cfg.output_dir / "summary.json"));
  EXPECT_FALSE(fs::exists(cfg.output_dir / "predictions.csv"));
  fs::remove_all(cfg.output_dir);
}

TEST(Scan, PointDiagnostics) {
  ScanConfig cfg;
  const auto p = suscept::analyze_point(10.0, cfg);
  ASSERT_TRUE(p.ok) << p.failure;
  EXPECT_EQ(p.spectrum.size(), 14);
  EXPECT_LT(p.diagnostics.floquet_defect, 1e-6);
  EXPECT_EQ(p.diagnostics.j0_defect, 0.0);
  EXPECT_LT(p.diagnostics.j1_defect, 1e-6);
  EXPECT_GE(p.diagnostics.min_eigenvalue_ratio, -1e-12);
  EXPECT_LT(p.diagnostics.orthonormality_error, 1e-6);
  EXPECT_EQ(p.amplitude.size(), 14u);
  EXPECT_EQ(p.cycles.size(), 14u);
}

TEST(Summary, RejectsMissingProvenance) {
  EXPECT_THROW((void)suscept::config_from_summary("{}"), ConfigError);
  EXPECT_THROW((void)suscept::config_from_summary("not json"), ConfigError);
}

TEST(Format, SeventeenSignificantDigits) {
  EXPECT_EQ(suscept::format_number(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(std::stod(suscept::format_number(std::numbers::pi)), std::numbers::pi);
  EXPECT_EQ(suscept::format_number(NAN), "nan");
}

TEST(Validate, DefaultOracleChecksPass) {
  const auto checks = suscept::run_oracle_checks(ScanConfig{});
  ASSERT_FALSE(checks.empty());
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << " error " << c.error;
  const std::string table = suscept::format_oracle_checks(checks);
  EXPECT_NE(table.find("period_mu1"), std::string::npos);
  EXPECT_NE(table.find("6.663"), std::string::npos);
}

TEST(Validate, LooseToleranceIsDetected) {
  ScanConfig loose;
  loose.rtol = 1e-4;
  const auto bad = suscept::run_oracle_checks(loose);
  const auto good = suscept::run_oracle_checks(ScanConfig{});
  bool any_failed = false;
  for (const auto& c : bad) any_failed = any_failed || !c.passed;
  EXPECT_TRUE(any_failed);
  // the Hessian-vs-oracle errors are reported and grow with the tolerance
  double worst_bad = 0.0, worst_good = 0.0;
  for (const auto& c : bad) {
    if (c.name.rfind("cost_oracle", 0) == 0) worst_bad = std::max(worst_bad, c.error);
  }
  for (const auto& c : good) {
    if (c.name.rfind("cost_oracle", 0) == 0) worst_good = std::max(worst_good, c.error);
  }
  EXPECT_GT(worst_bad, worst_good);
}

}  // namespace

/**
 * @file scan.hpp
 * @brief mu scan driver: configuration, per-point analysis, worker pool,
 *        serialization, and the oracle-check suite.
 *
 * Configuration is a flat key = value text file ('#' starts a comment):
 *
 *   mu             = 1, 10, 100      strictly increasing, positive
 *   order          = 4
 *   rtol           = 1e-10
 *   atol           = 1e-12
 *   output_dir     = suscept-out
 *   emit           = eigenvalues, eigenvectors, predictions, cycles, summary
 *   jobs           = 0               0 = hardware concurrency
 *   uniform_points = 2001            uniform tau overlay of emitted curves
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "suscept/error.hpp"
#include "suscept/integrate.hpp"
#include "suscept/orbit.hpp"
#include "suscept/susceptibility.hpp"

namespace suscept {

/// Configuration problem; field() names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorKind::InvalidArgument, field + ": " + what), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline constexpr std::string_view kEmitEigenvalues = "eigenvalues";
inline constexpr std::string_view kEmitEigenvectors = "eigenvectors";
inline constexpr std::string_view kEmitPredictions = "predictions";
inline constexpr std::string_view kEmitCycles = "cycles";
inline constexpr std::string_view kEmitSummary = "summary";
inline constexpr std::string_view kEmitOracleChecks = "oracle-checks";

/// 13 points log-spaced from 1 to 100.
[[nodiscard]] std::vector<double> default_mu_grid();

struct ScanConfig {
  std::vector<double> mu_values = default_mu_grid();
  int order = 4;
  double rtol = 1e-10;
  double atol = 1e-12;
  std::filesystem::path output_dir = "suscept-out";
  std::set<std::string> emit{std::string(kEmitEigenvalues), std::string(kEmitEigenvectors),
                             std::string(kEmitPredictions), std::string(kEmitCycles), std::string(kEmitSummary)};
  unsigned jobs = 0;
  std::size_t uniform_points = 2001;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  [[nodiscard]] bool emits(std::string_view what) const { return emit.count(std::string(what)) > 0; }
  [[nodiscard]] IntegratorSettings integrator() const;
  /// Relative eigenvalue floor (10 max(rtol, atol))^2.
  [[nodiscard]] double relative_floor() const;

  friend bool operator==(const ScanConfig&, const ScanConfig&) = default;
};

/// Applies one key = value setting. Throws ConfigError for unknown keys or
/// unparsable values.
void apply_setting(ScanConfig& cfg, std::string_view key, std::string_view value);

/// Parses a config stream over the defaults; does not validate.
[[nodiscard]] ScanConfig parse_config(std::istream& in);
[[nodiscard]] ScanConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config: every key, one per line.
[[nodiscard]] std::string format_config(const ScanConfig& cfg);

struct PointDiagnostics {
  double floquet_defect = 0.0;        ///< |Phi(1) F - F| / |F| at the anchor
  double route_discrepancy = 0.0;     ///< Gram route vs sample route, / lambda_1
  double min_eigenvalue_ratio = 0.0;  ///< min eig of the Gram-route H / lambda_1
  double j0_defect = 0.0;             ///< max_alpha |J(0)_alpha| / sqrt(max H_aa)
  double j1_defect = 0.0;             ///< max_alpha |J(1)_alpha| / sqrt(max H_aa)
  double orthonormality_error = 0.0;  ///< max |<dy_j, dy_k> - delta_jk| over unflagged modes
};

struct PointResult {
  double mu = 0.0;
  bool ok = false;
  std::string failure_kind;
  std::string failure;

  LimitCycle cycle;
  std::size_t steps = 0;  ///< accepted steps of the variational solution
  CorrectionCoefficients corrections;
  EigenSystem spectrum;  ///< SVD route
  Eigen::MatrixXd hessian;
  PointDiagnostics diagnostics;

  std::vector<double> amplitude;      ///< per rank, on the full step grid
  std::vector<double> jump_fraction;  ///< per rank
  std::vector<double> eta;            ///< per rank
  std::vector<Eigenprediction> predictions;  ///< on the emitted grid
  std::vector<Eigencycle> cycles;            ///< on the emitted grid

  double wall_seconds = 0.0;
};

/// Runs orbit, sensitivities, corrections, spectrum, predictions and cycles
/// at one mu. Never throws for numerical failures: they are recorded in the
/// result.
[[nodiscard]] PointResult analyze_point(double mu, const ScanConfig& cfg);

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Finite-difference and brute-force cost oracles at mu = 1.
[[nodiscard]] std::vector<OracleCheck> run_oracle_checks(const ScanConfig& cfg);
[[nodiscard]] std::string format_oracle_checks(const std::vector<OracleCheck>& checks);

struct ScanReport {
  ScanConfig config;
  std::vector<PointResult> points;  ///< ordered as config.mu_values
  PowerLawFit slopes;
  double slope_mu_lo = 10.0;
  double slope_mu_hi = 100.0;
  double spread_growth = 0.0;  ///< spread(last ok mu) / spread(first ok mu)
  std::vector<OracleCheck> oracle_checks;
  double wall_seconds = 0.0;

  [[nodiscard]] bool all_ok() const;
};

using ProgressCallback = std::function<void(const PointResult&)>;

/// Dispatches mu points to cfg.jobs workers and merges by mu. Does not touch
/// the file system.
[[nodiscard]] ScanReport compute_scan(const ScanConfig& cfg, const ProgressCallback& progress = {});

/// Creates output_dir and checks it is writable; throws ConfigError otherwise.
void prepare_output_dir(const ScanConfig& cfg);

/// Writes every emitted file into cfg.output_dir.
void write_outputs(const ScanReport& report);

/// prepare_output_dir, compute_scan, write_outputs.
[[nodiscard]] ScanReport run_scan(const ScanConfig& cfg, const ProgressCallback& progress = {});

/// Numeric formatting used by every CSV field: %.16e.
[[nodiscard]] std::string format_number(double v);

[[nodiscard]] std::string summary_json(const ScanReport& report);
/// Reads the provenance block of a summary.json document back into a config.
[[nodiscard]] ScanConfig config_from_summary(std::string_view json_text);

}  // namespace suscept

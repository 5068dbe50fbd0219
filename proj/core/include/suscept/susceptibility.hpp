/**
 * @file susceptibility.hpp
 * @brief Cost Hessian H = J^T J, its spectrum, eigenpredictions, eigencycles
 *        and a brute-force cost oracle.
 *
 * Two routes to H are provided. assemble_hessian() contracts the Gram matrix
 * that the adaptive integrator accumulated alongside the sensitivities.
 * jacobian_spectrum() instead takes the SVD of the square-root-weighted
 * Jacobian sampled at Gauss nodes of every accepted step; squaring singular
 * values keeps relative accuracy for eigenvalues far below eps * lambda_1,
 * which the Gram route cannot resolve. The two agree entrywise to within the
 * integration tolerance (see hessian_route_discrepancy()).
 */
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "suscept/dynamics.hpp"
#include "suscept/integrate.hpp"
#include "suscept/orbit.hpp"
#include "suscept/sensitivity.hpp"

namespace suscept {

struct Hessian {
  Eigen::MatrixXd entries;
  double mu = 0.0;
  int order = 0;
};

struct EigenSystem {
  Eigen::VectorXd eigenvalues;   ///< descending
  Eigen::MatrixXd eigenvectors;  ///< orthonormal columns, largest |component| positive
  double noise_floor = 0.0;
  std::vector<bool> flagged;     ///< eigenvalue <= noise_floor

  [[nodiscard]] Eigen::Index size() const noexcept { return eigenvalues.size(); }
  [[nodiscard]] double spread() const;  ///< lambda_1 / lambda_P
};

/// Relative floor (times lambda_1) for spectra taken from a Gram matrix.
inline constexpr double kGramNoiseFloor = 1e-15;

/// H = A^T G A from the integrator-accumulated Gram matrix. Exactly symmetric.
[[nodiscard]] Hessian assemble_hessian(const SensitivityBundle& bundle, const CorrectionCoefficients& corrections);

/// Symmetric eigensolver, descending order, sign convention, floor lambda_1 * 1e-15.
[[nodiscard]] EigenSystem eigendecompose(const Hessian& h);

/// Square-root quadrature of the total Jacobian: rows sqrt(w_i) J(tau_i).
struct JacobianSamples {
  std::vector<double> tau;
  std::vector<double> weight;
  Eigen::MatrixXd rows;  ///< nodes x P, already scaled by sqrt(weight)
};

/// Gauss-Legendre nodes on every accepted step of the variational solution.
/// With 5 nodes the quadrature of J^2 is exact for the quartic dense output.
[[nodiscard]] JacobianSamples sample_jacobian(const SensitivityBundle& bundle,
                                              const CorrectionCoefficients& corrections, int nodes_per_step = 5);

/// H = R^T R for the R factor of the weighted samples.
[[nodiscard]] Hessian hessian_from_samples(const JacobianSamples& samples, double mu, int order);

/// Spectrum via SVD of the weighted samples; lambda_k = sigma_k^2. Flags
/// eigenvalues at or below relative_floor * lambda_1.
[[nodiscard]] EigenSystem jacobian_spectrum(const JacobianSamples& samples, double relative_floor);

/// max |H_gram - H_samples| / lambda_1.
[[nodiscard]] double hessian_route_discrepancy(const Hessian& gram_route, const Hessian& sample_route);

struct Eigenprediction {
  Eigen::Index rank = 0;  ///< 0-based, 0 = stiffest
  std::vector<double> tau;
  std::vector<double> delta_y;
  double amplitude = 0.0;  ///< max |delta_y|
  bool flagged = false;    ///< not normalizable (eigenvalue below the floor)
};

/// Accepted integrator steps in tau merged with a uniform overlay. When
/// max_step_points is nonzero the step times are thinned by a constant stride
/// to at most that many.
[[nodiscard]] std::vector<double> output_grid(const SensitivityBundle& bundle, std::size_t uniform_points = 2001,
                                              std::size_t max_step_points = 0);

/// delta_y_k(tau) = J(tau) e_k / sqrt(lambda_k) on the given grid.
[[nodiscard]] std::vector<Eigenprediction> eigenpredictions(const SensitivityBundle& bundle,
                                                            const CorrectionCoefficients& corrections,
                                                            const EigenSystem& eigsys,
                                                            const std::vector<double>& grid);

/// Quadrature inner products int delta_y_j delta_y_k dtau under the sample
/// quadrature, for every pair of modes.
[[nodiscard]] Eigen::MatrixXd prediction_gram(const JacobianSamples& samples, const EigenSystem& eigsys);

struct Eigencycle {
  Eigen::Index rank = 0;
  double eta = 0.0;
  std::vector<double> tau;
  std::vector<double> x;
  std::vector<double> y_unperturbed;
  std::vector<double> y_perturbed;
};

/// 0.05 * (orbit y half-range) / amplitude of the mode.
[[nodiscard]] double default_eta(const SensitivityBundle& bundle, const Eigenprediction& prediction);

/// Phase-space curve (x(tau), y(tau) + eta delta_y_k(tau)) on the prediction grid.
[[nodiscard]] Eigencycle eigencycle(const SensitivityBundle& bundle, const Eigenprediction& prediction, double eta);

/// Fraction of int (eta delta_y)^2 that falls within `window` total tau measure
/// centred on the two jumps (mid-jump = sign changes of x).
[[nodiscard]] double jump_localized_fraction(const SensitivityBundle& bundle, const Eigenprediction& prediction,
                                             double window = 0.05);

/// Brute-force susceptibility cost for a finite perturbation a: settle the
/// perturbed cycle, anchor on the same section, rescale both to unit period,
/// and integrate half the squared y-difference.
[[nodiscard]] double cost_oracle(const ModelConfig& cfg, const ParameterVector& a, const IntegratorSettings& settings,
                                 const OrbitSettings& orbit = {});
/// Same, reusing an already located unperturbed cycle.
[[nodiscard]] double cost_oracle(const ModelConfig& cfg, const ParameterVector& a, const LimitCycle& reference,
                                 const IntegratorSettings& settings, const OrbitSettings& orbit = {});

struct PowerLawFit {
  std::vector<double> slope;        ///< per rank; NaN when too few points
  std::vector<double> intercept;    ///< log10 lambda at mu = 1
  std::vector<std::size_t> points;  ///< samples used per rank
};

/// Least-squares slope of log lambda_k against log mu over [mu_lo, mu_hi],
/// tracking modes by sorted rank and skipping flagged eigenvalues.
[[nodiscard]] PowerLawFit fit_power_laws(const std::vector<double>& mu, const std::vector<EigenSystem>& spectra,
                                         double mu_lo = 10.0, double mu_hi = 100.0, std::size_t min_points = 4);

}  // namespace suscept

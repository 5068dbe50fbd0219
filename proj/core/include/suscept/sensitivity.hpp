/**
 * @file sensitivity.hpp
 * @brief First-order variational equations over one period in rescaled time
 *        tau = t / T, and the periodicity corrections at the best fit a = 0.
 *
 * Augmented state (dynamic block, all under error control):
 *
 *   z            dz/dtau     = T F(z)
 *   S_alpha      dS/dtau     = T (F_z S_alpha + F_{a_alpha})       S(0)   = 0
 *   Phi          dPhi/dtau   = T F_z Phi                           Phi(0) = I
 *   psi          dpsi/dtau   = T F_z psi + F(z)                    psi(0) = 0
 *
 * followed by the upper triangle of the Gram matrix of the y-basis
 * b = (S_1,y .. S_P,y, Phi_yx, psi_y), accumulated as dG/dtau = b b^T and kept
 * out of step control.
 */
#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "suscept/dynamics.hpp"
#include "suscept/integrate.hpp"
#include "suscept/orbit.hpp"

namespace suscept {

/// Offsets into the augmented state for P parameters.
struct AugmentedLayout {
  Eigen::Index parameters = 0;

  [[nodiscard]] Eigen::Index z() const noexcept { return 0; }
  [[nodiscard]] Eigen::Index s(Eigen::Index alpha) const noexcept { return 2 + 2 * alpha; }
  /// Phi stored column-major: xx, yx, xy, yy.
  [[nodiscard]] Eigen::Index phi() const noexcept { return 2 + 2 * parameters; }
  [[nodiscard]] Eigen::Index psi() const noexcept { return phi() + 4; }
  [[nodiscard]] Eigen::Index dynamic_size() const noexcept { return psi() + 2; }
  /// Basis functions: P sensitivities, Phi_yx, psi_y.
  [[nodiscard]] Eigen::Index basis_size() const noexcept { return parameters + 2; }
  [[nodiscard]] Eigen::Index gram() const noexcept { return dynamic_size(); }
  [[nodiscard]] Eigen::Index gram_size() const noexcept { return basis_size() * (basis_size() + 1) / 2; }
  [[nodiscard]] Eigen::Index total_size() const noexcept { return gram() + gram_size(); }
};

class SensitivityBundle {
 public:
  SensitivityBundle(ModelConfig cfg, LimitCycle cycle, Trajectory traj, Eigen::MatrixXd gram);

  [[nodiscard]] const ModelConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const LimitCycle& cycle() const noexcept { return cycle_; }
  [[nodiscard]] const Trajectory& trajectory() const noexcept { return traj_; }
  [[nodiscard]] const AugmentedLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] Eigen::Index parameter_count() const noexcept { return layout_.parameters; }
  /// Gram matrix of the y-basis, integrated over tau in [0, 1].
  [[nodiscard]] const Eigen::MatrixXd& gram() const noexcept { return gram_; }

  /// Dynamic block at tau (dense output).
  [[nodiscard]] Vector at(double tau) const { return traj_.at(tau); }
  [[nodiscard]] State state(double tau) const;
  [[nodiscard]] Eigen::Vector2d s(Eigen::Index alpha, double tau) const;
  [[nodiscard]] Matrix2 phi(double tau) const;
  [[nodiscard]] Eigen::Vector2d psi(double tau) const;
  /// b(tau) = (S_alpha,y, Phi_yx, psi_y).
  [[nodiscard]] Eigen::VectorXd basis(double tau) const;
  [[nodiscard]] Eigen::VectorXd basis_from(const Vector& aug) const;

  /// Dynamic block at tau = 1 exactly (the integrator's final state).
  [[nodiscard]] const Vector& end_state() const noexcept { return traj_.final_state(); }

 private:
  ModelConfig cfg_;
  LimitCycle cycle_;
  Trajectory traj_;
  Eigen::MatrixXd gram_;
  AugmentedLayout layout_;
};

/// Integrates the augmented system over tau in [0, 1] at a = 0.
/// Requires cycle.params to be zero.
[[nodiscard]] SensitivityBundle integrate_variational(const LimitCycle& cycle, const ModelConfig& cfg,
                                                      const IntegratorSettings& settings = {});

struct CorrectionCoefficients {
  Eigen::VectorXd dx0_da;  ///< d x0 / d a_alpha; the y-component is pinned to 0
  Eigen::VectorXd dT_da;   ///< d T / d a_alpha in unscaled time

  /// (P+2) x P map from parameter changes to basis coefficients:
  /// identity block, then the dx0 row, then the dT row.
  [[nodiscard]] Eigen::MatrixXd coefficient_matrix() const;
};

/// Solves [(I - Phi(1)) e_x, -psi(1)] (dx0, dT)^T = S_alpha(1) for every alpha.
/// Throws SingularConstraint when the 2x2 system is numerically singular.
[[nodiscard]] CorrectionCoefficients solve_corrections(const SensitivityBundle& bundle);

/// J(tau)_alpha = S_alpha,y + Phi_yx dx0_alpha + psi_y dT_alpha.
[[nodiscard]] Eigen::VectorXd total_jacobian(const SensitivityBundle& bundle,
                                             const CorrectionCoefficients& corrections, double tau);

/// Full state-valued total sensitivity (2 x P): S + Phi (dx0, 0)^T + psi dT.
[[nodiscard]] Eigen::Matrix<double, 2, Eigen::Dynamic> total_state_sensitivity(
    const SensitivityBundle& bundle, const CorrectionCoefficients& corrections, double tau);

}  // namespace suscept

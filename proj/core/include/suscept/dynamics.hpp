/**
 * @file dynamics.hpp
 * @brief Perturbed van der Pol vector field in Lienard form.
 *
 *   mu^-2 xdot = u + sum_{m+n<=N} a_{m,n} u^m x^n,   u = x - x^3/3 - y
 *   ydot       = x
 *
 * Time is the unscaled t. Only the xdot equation is perturbed. Indices with
 * m >= 1 vanish on the critical manifold u = 0 ("fast" parameters); the m = 0
 * block ("slow" parameters) shifts the manifold itself. The (1,0) term is a
 * pure rescaling of mu and is not part of the family.
 */
#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace suscept {

struct PerturbationIndex {
  int m = 0;  ///< power of u = x - x^3/3 - y
  int n = 0;  ///< power of x

  [[nodiscard]] constexpr bool is_slow() const noexcept { return m == 0; }
  [[nodiscard]] constexpr bool is_fast() const noexcept { return m >= 1; }

  friend constexpr auto operator<=>(const PerturbationIndex&, const PerturbationIndex&) = default;
};

/// P(N) = (N+1)(N+2)/2 - 1.
[[nodiscard]] std::size_t parameter_count(int order);

/// All (m,n) with m+n <= order except (1,0), ascending by m then n, so the
/// slow block comes first. Throws InvalidArgument for order < 1.
[[nodiscard]] std::vector<PerturbationIndex> enumerate_parameters(int order);

struct ModelConfig {
  double mu = 1.0;
  int order = 4;

  /// Ratio of time scales, mu^-2.
  [[nodiscard]] double epsilon() const noexcept { return 1.0 / (mu * mu); }
  void validate() const;
};

struct State {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const State&, const State&) = default;
};

/// Coefficients a_{m,n} in canonical order for a given perturbation order.
struct ParameterVector {
  int order = 0;
  Eigen::VectorXd values;

  [[nodiscard]] static ParameterVector zeros(int order);
  [[nodiscard]] static ParameterVector unit(int order, std::size_t alpha, double scale = 1.0);
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
  [[nodiscard]] bool is_zero() const noexcept;
};

using Matrix2 = Eigen::Matrix2d;
using ParamJacobian = Eigen::Matrix<double, 2, Eigen::Dynamic>;

/// Precomputed field for one (mu, N). Evaluation is allocation-free.
class VanDerPolField {
 public:
  explicit VanDerPolField(const ModelConfig& cfg);

  [[nodiscard]] const ModelConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const std::vector<PerturbationIndex>& indices() const noexcept { return indices_; }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return indices_.size(); }

  [[nodiscard]] State rhs(const State& z, const ParameterVector& a) const;
  [[nodiscard]] Matrix2 jacobian_state(const State& z, const ParameterVector& a) const;

  /// Writes column alpha of dF/da into out (2 entries per column, row 1 is zero).
  void jacobian_params(const State& z, std::span<double> out_xrow) const;
  [[nodiscard]] ParamJacobian jacobian_params(const State& z) const;

  /// Unperturbed field and its state Jacobian, the a = 0 hot path.
  [[nodiscard]] State rhs(const State& z) const;
  [[nodiscard]] Matrix2 jacobian_state(const State& z) const;

 private:
  ModelConfig cfg_;
  double mu2_;
  std::vector<PerturbationIndex> indices_;
};

[[nodiscard]] State rhs(const State& z, const ParameterVector& a, const ModelConfig& cfg);
[[nodiscard]] Matrix2 jacobian_state(const State& z, const ParameterVector& a, const ModelConfig& cfg);
[[nodiscard]] ParamJacobian jacobian_params(const State& z, const ModelConfig& cfg);

/// u = x - x^3/3 - y; zero on the critical manifold.
[[nodiscard]] constexpr double nullcline_offset(const State& z) noexcept {
  return z.x - z.x * z.x * z.x / 3.0 - z.y;
}

}  // namespace suscept

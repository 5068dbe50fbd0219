/**
 * @file integrate.hpp
 * @brief Adaptive Dormand-Prince 5(4) integration with dense output and
 *        section-crossing localization.
 *
 * The augmented sensitivity systems carry quadrature accumulators after the
 * dynamic components. Those trailing components can be excluded from error
 * control and from dense storage (see IntegratorSettings::controlled and
 * IntegratorSettings::dense), which keeps the step sequence identical with or
 * without accumulators and keeps trajectory storage proportional to the
 * dynamic dimension.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace suscept {

using Vector = Eigen::VectorXd;

/// dydt = f(t, y). The output vector is pre-sized by the integrator.
using VectorField = std::function<void(double t, const Vector& y, Vector& dydt)>;

struct IntegratorSettings {
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 10'000'000;
  std::optional<double> initial_step;
  /// Number of leading components under error control; 0 means all.
  std::size_t controlled = 0;
  /// Number of leading components kept in the dense output; 0 means all.
  std::size_t dense = 0;

  void validate() const;
};

/// One accepted step [t0, t0 + h] with its continuous extension.
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  // Hairer's rcont1..rcont5 for the first `dense` components.
  Vector r1, r2, r3, r4, r5;

  [[nodiscard]] double t1() const noexcept { return t0 + h; }
  void evaluate(double t, Vector& out) const;
  [[nodiscard]] double evaluate_component(double t, Eigen::Index i) const;
};

class Trajectory {
 public:
  Trajectory() = default;

  [[nodiscard]] double t_begin() const noexcept { return times_.empty() ? 0.0 : times_.front(); }
  [[nodiscard]] double t_end() const noexcept { return times_.empty() ? 0.0 : times_.back(); }
  [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
  [[nodiscard]] const std::vector<DenseStep>& steps() const noexcept { return steps_; }
  [[nodiscard]] std::size_t step_count() const noexcept { return steps_.size(); }
  /// Full state (all components) at t_end.
  [[nodiscard]] const Vector& final_state() const noexcept { return final_; }
  [[nodiscard]] const Vector& initial_state() const noexcept { return initial_; }
  [[nodiscard]] Eigen::Index dense_dimension() const noexcept;
  [[nodiscard]] std::size_t rejected_steps() const noexcept { return rejected_; }

  /// Dense output of the stored components; t is clamped to the span.
  [[nodiscard]] Vector at(double t) const;
  void at(double t, Vector& out) const;
  [[nodiscard]] double component_at(double t, Eigen::Index i) const;
  /// Index of the step whose interval contains t.
  [[nodiscard]] std::size_t locate(double t) const;

 private:
  friend class DormandPrince;
  std::vector<double> times_;
  std::vector<DenseStep> steps_;
  Vector initial_;
  Vector final_;
  std::size_t rejected_ = 0;
};

/// Stepper with persistent state, for integrations that stop on events.
class DormandPrince {
 public:
  DormandPrince(VectorField f, Vector y0, double t0, const IntegratorSettings& settings);

  /// Advances one accepted step without passing t_limit. Returns the step.
  const DenseStep& step(double t_limit);

  [[nodiscard]] double t() const noexcept { return t_; }
  [[nodiscard]] const Vector& y() const noexcept { return y_; }
  [[nodiscard]] std::size_t accepted() const noexcept { return accepted_; }
  [[nodiscard]] std::size_t rejected() const noexcept { return rejected_; }

  /// Integrates to t_end, recording every accepted step.
  Trajectory run_to(double t_end);

 private:
  double initial_step(double t_end);
  [[nodiscard]] double error_norm(const Vector& y_old, const Vector& y_new, const Vector& err) const;

  VectorField f_;
  IntegratorSettings settings_;
  Eigen::Index n_;
  Eigen::Index n_ctrl_;
  Eigen::Index n_dense_;
  double t_;
  Vector y_;
  double h_ = 0.0;
  double fac_old_ = 1e-4;
  bool last_rejected_ = false;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  Vector k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, err_;
  DenseStep last_;
};

/// Integrates y' = f(t, y) from t0 to t1 and returns the dense trajectory.
/// Throws StepLimitExceeded or NonFiniteState.
[[nodiscard]] Trajectory integrate(const VectorField& f, const Vector& y0, double t0, double t1,
                                   const IntegratorSettings& settings = {});

enum class Direction { Rising, Falling };

/// Scalar event g(t, y) evaluated on dense-output states.
using EventFunction = std::function<double(double t, const Vector& y)>;

struct Crossing {
  double t = 0.0;
  Vector state;
  double residual = 0.0;  ///< |g(t*, y(t*))|
};

struct EventOptions {
  double tolerance = 1e-12;
  int max_iterations = 100;
  /// Crossings at or before this time are ignored.
  double t_after = -std::numeric_limits<double>::infinity();
};

/// Localizes a sign change of g on [a, b] inside one step (g(a), g(b) of
/// opposite sign). Bisection first, then Illinois secant.
[[nodiscard]] Crossing localize_crossing(const DenseStep& step, const EventFunction& g, double a, double ga,
                                         double b, double gb, const EventOptions& opts = {});

/// First crossing after opts.t_after in a stored trajectory. Throws NoCrossing.
[[nodiscard]] Crossing find_crossing(const Trajectory& traj, const EventFunction& g, Direction dir,
                                     const EventOptions& opts = {});

/// Integrates from (t0, y0) until the first crossing after opts.t_after, or
/// throws NoCrossing once t_max is reached.
[[nodiscard]] Crossing integrate_to_crossing(const VectorField& f, const Vector& y0, double t0, double t_max,
                                             const EventFunction& g, Direction dir,
                                             const IntegratorSettings& settings = {},
                                             const EventOptions& opts = {});

}  // namespace suscept

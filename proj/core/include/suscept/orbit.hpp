/**
 * @file orbit.hpp
 * @brief Limit-cycle location on the Poincare section y = c, x > 0 (rising).
 *
 * The anchor of a cycle is its rising crossing of the section on the right
 * slow branch. At large mu that crossing lies on the slow manifold, where the
 * flow is well conditioned. The anchor's y is pinned to the section value, so
 * two cycles anchored on the same section differ only in x.
 */
#pragma once

#include "suscept/dynamics.hpp"
#include "suscept/integrate.hpp"

namespace suscept {

struct OrbitSettings {
  /// Bound on the distance to the fixed point, from successive return defects.
  double tolerance = 1e-9;
  int max_periods = 200;
  State seed{2.0, 0.0};
  /// Section y = section_y, crossed with x > 0 and ydot > 0.
  double section_y = 0.0;
};

struct LimitCycle {
  State anchor;
  double period = 0.0;  ///< unscaled time t
  double mu = 0.0;
  ParameterVector params;
  double residual = 0.0;  ///< max-norm |z(T) - z(0)|
};

/// Crude upper bound on one return time, used to bound section searches.
[[nodiscard]] double return_time_bound(double mu);

/// Flows from start through successive section returns until two agree to
/// settings.tolerance. Throws NoConvergence after max_periods returns.
[[nodiscard]] State settle(const ModelConfig& cfg, const ParameterVector& a, State start,
                           const IntegratorSettings& settings, const OrbitSettings& orbit = {});

/// Period from the anchor to its next rising section crossing.
[[nodiscard]] LimitCycle measure_period(const ModelConfig& cfg, const ParameterVector& a, const State& anchor,
                                        const IntegratorSettings& settings, const OrbitSettings& orbit = {});

/// settle() from orbit.seed followed by measure_period().
[[nodiscard]] LimitCycle find_limit_cycle(const ModelConfig& cfg, const ParameterVector& a,
                                          const IntegratorSettings& settings, const OrbitSettings& orbit = {});

/// Plain (unaugmented) flow of the perturbed field as an integrator callback.
[[nodiscard]] VectorField planar_field(const ModelConfig& cfg, const ParameterVector& a);

}  // namespace suscept

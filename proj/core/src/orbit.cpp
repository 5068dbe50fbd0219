#include "suscept/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "suscept/error.hpp"

namespace suscept {

namespace {

EventFunction section_event(double section_y) {
  // ydot = x holds for every member of the family, so a rising crossing of
  // y = c always has x > 0.
  return [section_y](double, const Vector& z) { return z[1] - section_y; };
}

Crossing next_return(const ModelConfig& cfg, const ParameterVector& a, const State& from,
                     const IntegratorSettings& settings, const OrbitSettings& orbit) {
  IntegratorSettings s = settings;
  s.controlled = 0;
  s.dense = 0;
  Vector z0(2);
  z0 << from.x, from.y;
  const double t_max = return_time_bound(cfg.mu);
  return integrate_to_crossing(planar_field(cfg, a), z0, 0.0, t_max, section_event(orbit.section_y),
                               Direction::Rising, s);
}

}  // namespace

double return_time_bound(double mu) {
  // Harmonic limit 2 pi / mu for small mu; relaxation period 3 - 2 ln 2 plus
  // O(mu^-4/3) corrections for large mu. Allow a generous margin over both.
  return 10.0 * std::max(2.0 * std::numbers::pi / mu, 2.0 * std::numbers::pi);
}

VectorField planar_field(const ModelConfig& cfg, const ParameterVector& a) {
  VanDerPolField field(cfg);
  if (a.is_zero()) {
    return [field](double, const Vector& z, Vector& dz) {
      const State d = field.rhs(State{z[0], z[1]});
      dz[0] = d.x;
      dz[1] = d.y;
    };
  }
  return [field, a](double, const Vector& z, Vector& dz) {
    const State d = field.rhs(State{z[0], z[1]}, a);
    dz[0] = d.x;
    dz[1] = d.y;
  };
}

State settle(const ModelConfig& cfg, const ParameterVector& a, State start, const IntegratorSettings& settings,
             const OrbitSettings& orbit) {
  cfg.validate();
  if (!std::isfinite(start.x) || !std::isfinite(start.y)) {
    throw Error(ErrorKind::InvalidArgument, "settle start state is not finite");
  }

  State current = start;
  bool on_section = false;
  double last_defect = std::numeric_limits<double>::infinity();
  for (int k = 0; k < orbit.max_periods; ++k) {
    Crossing c;
    try {
      c = next_return(cfg, a, current, settings, orbit);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoCrossing) {
        throw Error(ErrorKind::NoConvergence,
                    "trajectory stopped returning to the section (attractor destroyed?): " + std::string(e.what()));
      }
      throw;
    }
    const State next{c.state[0], orbit.section_y};
    if (on_section) {
      // Geometric tail d rho / (1 - rho) bounds the distance to the fixed
      // point when contraction is weak.
      const double defect = std::max(std::abs(next.x - current.x), std::abs(next.y - current.y));
      const double rho = defect / last_defect;
      if (defect < orbit.tolerance && rho < 1.0 && defect * rho / (1.0 - rho) < orbit.tolerance) return next;
      last_defect = defect;
    }
    current = next;
    on_section = true;
  }
  throw Error(ErrorKind::NoConvergence,
              "section returns did not settle within " + std::to_string(orbit.max_periods) + " periods");
}

LimitCycle measure_period(const ModelConfig& cfg, const ParameterVector& a, const State& anchor,
                          const IntegratorSettings& settings, const OrbitSettings& orbit) {
  cfg.validate();
  const Crossing c = next_return(cfg, a, anchor, settings, orbit);
  LimitCycle cycle;
  cycle.anchor = anchor;
  cycle.period = c.t;
  cycle.mu = cfg.mu;
  cycle.params = a;
  cycle.residual = std::max(std::abs(c.state[0] - anchor.x), std::abs(c.state[1] - anchor.y));
  return cycle;
}

LimitCycle find_limit_cycle(const ModelConfig& cfg, const ParameterVector& a, const IntegratorSettings& settings,
                            const OrbitSettings& orbit) {
  const State anchor = settle(cfg, a, orbit.seed, settings, orbit);
  return measure_period(cfg, a, anchor, settings, orbit);
}

}  // namespace suscept

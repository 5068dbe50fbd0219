#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "suscept/error.hpp"
#include "suscept/orbit.hpp"
#include "suscept/sensitivity.hpp"

namespace {

using suscept::IntegratorSettings;
using suscept::ModelConfig;
using suscept::ParameterVector;

struct Fixture {
  ModelConfig cfg;
  suscept::LimitCycle cycle;
  suscept::SensitivityBundle bundle;
  suscept::CorrectionCoefficients corr;
};

Fixture make(double mu, int order = 4) {
  const ModelConfig cfg{mu, order};
  auto cycle = suscept::find_limit_cycle(cfg, ParameterVector::zeros(order), {});
  auto bundle = suscept::integrate_variational(cycle, cfg);
  auto corr = suscept::solve_corrections(bundle);
  return {cfg, cycle, std::move(bundle), std::move(corr)};
}

const Fixture& mu1() {
  static const Fixture f = make(1.0);
  return f;
}

TEST(Layout, DimensionAtOrderFour) {
  suscept::AugmentedLayout layout;
  layout.parameters = 14;
  EXPECT_EQ(layout.dynamic_size(), 36);
  EXPECT_EQ(layout.basis_size(), 16);
  EXPECT_EQ(layout.gram_size(), 136);
}

TEST(Variational, InitialConditions) {
  const auto& f = mu1();
  const auto& b = f.bundle;
  for (Eigen::Index a = 0; a < b.parameter_count(); ++a) EXPECT_TRUE(b.s(a, 0.0).isZero());
  EXPECT_TRUE(b.phi(0.0).isIdentity());
  EXPECT_TRUE(b.psi(0.0).isZero());
  EXPECT_EQ(b.state(0.0).x, f.cycle.anchor.x);
}

TEST(Variational, StateReturnsToAnchor) {
  for (double mu : {1.0, 10.0}) {
    const auto f = make(mu);
    const auto z = f.bundle.end_state();
    EXPECT_NEAR(z[0], f.cycle.anchor.x, 1e-8) << "mu = " << mu;
    EXPECT_NEAR(z[1], f.cycle.anchor.y, 1e-8) << "mu = " << mu;
  }
}

TEST(Variational, UnitFloquetMultiplier) {
  for (double mu : {1.0, 10.0, 100.0}) {
    const auto f = make(mu);
    const suscept::State fz = suscept::VanDerPolField(f.cfg).rhs(f.cycle.anchor);
    const Eigen::Vector2d flow{fz.x, fz.y};
    const Eigen::Vector2d mapped = f.bundle.phi(1.0) * flow;
    EXPECT_LT((mapped - flow).norm() / flow.norm(), 1e-6) << "mu = " << mu;
  }
}

// det Phi(1) = exp(T int_0^1 tr F_z dtau), tr F_z = mu^2 (1 - x^2).
TEST(Variational, AbelLiouville) {
  for (double mu : {1.0, 2.0, 3.0}) {
    const auto f = make(mu);
    const double gl[3] = {0.5 - std::sqrt(0.15), 0.5, 0.5 + std::sqrt(0.15)};
    const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    double integral = 0.0;
    for (const auto& step : f.bundle.trajectory().steps()) {
      for (int q = 0; q < 3; ++q) {
        const double x = step.evaluate_component(step.t0 + gl[q] * step.h, 0);
        integral += gw[q] * step.h * mu * mu * (1.0 - x * x);
      }
    }
    const double expected = std::exp(f.cycle.period * integral);
    const double det = f.bundle.phi(1.0).determinant();
    // det of O(1) entries cannot resolve values below ~ tol |Phi|^2.
    const double floor = 1e-10 * f.bundle.phi(1.0).squaredNorm();
    EXPECT_LT(expected, 1.0);
    EXPECT_LT(std::abs(det - expected), std::max(1e-4 * expected, floor)) << "mu = " << mu;
  }
}

// S_alpha(tau) against central differences with the anchor and T frozen.
TEST(Variational, ParameterSensitivityMatchesFiniteDifference) {
  const auto& f = mu1();
  IntegratorSettings tight;
  tight.rtol = 1e-13;
  tight.atol = 1e-15;
  const double h = 1e-7;
  suscept::Vector z0(2);
  z0 << f.cycle.anchor.x, f.cycle.anchor.y;
  for (std::size_t alpha : {std::size_t{0}, std::size_t{1}, std::size_t{6}, std::size_t{13}}) {
    const auto plus = suscept::integrate(suscept::planar_field(f.cfg, ParameterVector::unit(4, alpha, h)), z0, 0.0,
                                         f.cycle.period, tight);
    const auto minus = suscept::integrate(suscept::planar_field(f.cfg, ParameterVector::unit(4, alpha, -h)), z0,
                                          0.0, f.cycle.period, tight);
    for (double tau : {0.25, 0.5, 0.75}) {
      const suscept::Vector fd = (plus.at(tau * f.cycle.period) - minus.at(tau * f.cycle.period)) / (2.0 * h);
      const Eigen::Vector2d s = f.bundle.s(static_cast<Eigen::Index>(alpha), tau);
      EXPECT_LT((fd - s).norm() / s.norm(), 1e-4) << "alpha = " << alpha << ", tau = " << tau;
    }
  }
}

TEST(Variational, PeriodSensitivityMatchesFiniteDifference) {
  const auto& f = mu1();
  IntegratorSettings tight;
  tight.rtol = 1e-13;
  tight.atol = 1e-15;
  const double h = 1e-6;
  suscept::Vector z0(2);
  z0 << f.cycle.anchor.x, f.cycle.anchor.y;
  const auto field = suscept::planar_field(f.cfg, ParameterVector::zeros(4));
  const auto plus = suscept::integrate(field, z0, 0.0, f.cycle.period + h, tight);
  const auto minus = suscept::integrate(field, z0, 0.0, f.cycle.period - h, tight);
  for (double tau : {0.3, 0.6, 0.9}) {
    const suscept::Vector fd =
        (plus.at(tau * (f.cycle.period + h)) - minus.at(tau * (f.cycle.period - h))) / (2.0 * h);
    const Eigen::Vector2d psi = f.bundle.psi(tau);
    EXPECT_LT((fd - psi).norm() / psi.norm(), 1e-5) << "tau = " << tau;
  }
}

TEST(Variational, RequiresBestFit) {
  auto cycle = mu1().cycle;
  cycle.params = ParameterVector::unit(4, 0, 1e-3);
  EXPECT_THROW((void)suscept::integrate_variational(cycle, mu1().cfg), suscept::Error);
}

TEST(Corrections, PeriodDerivativeMatchesRemeasuredPeriod) {
  const auto& f = mu1();
  const double h = 1e-6;
  const double scale = f.corr.dT_da.cwiseAbs().maxCoeff();
  for (std::size_t alpha : {std::size_t{0}, std::size_t{1}, std::size_t{2}}) {
    const auto plus = suscept::find_limit_cycle(f.cfg, ParameterVector::unit(4, alpha, h), {});
    const auto minus = suscept::find_limit_cycle(f.cfg, ParameterVector::unit(4, alpha, -h), {});
    const double fd = (plus.period - minus.period) / (2.0 * h);
    // dT/da00 is zero by the x -> -x symmetry; compare against the largest entry.
    EXPECT_LT(std::abs(fd - f.corr.dT_da[static_cast<Eigen::Index>(alpha)]) / scale, 1e-3) << "alpha = " << alpha;
  }
  EXPECT_LT(std::abs(f.corr.dT_da[0]) / scale, 1e-6);
}

TEST(Corrections, AnchorShiftMatchesResettledCycle) {
  const auto& f = mu1();
  const double h = 1e-6;
  const auto plus = suscept::find_limit_cycle(f.cfg, ParameterVector::unit(4, 1, h), {});
  const auto minus = suscept::find_limit_cycle(f.cfg, ParameterVector::unit(4, 1, -h), {});
  const double fd = (plus.anchor.x - minus.anchor.x) / (2.0 * h);
  EXPECT_LT(std::abs(fd / f.corr.dx0_da[1] - 1.0), 1e-3);
  EXPECT_EQ(plus.anchor.y, 0.0);
}

TEST(Corrections, CoefficientMatrixLayout) {
  const auto& c = mu1().corr;
  const auto a = c.coefficient_matrix();
  ASSERT_EQ(a.rows(), 16);
  ASSERT_EQ(a.cols(), 14);
  EXPECT_TRUE(a.topRows(14).isIdentity());
  EXPECT_EQ(a.row(14).transpose(), c.dx0_da);
  EXPECT_EQ(a.row(15).transpose(), c.dT_da);
}

TEST(TotalJacobian, VanishesAtTauZero) {
  const auto j = suscept::total_jacobian(mu1().bundle, mu1().corr, 0.0);
  EXPECT_TRUE(j.isZero(0.0));
}

TEST(TotalJacobian, PeriodicAtTauOne) {
  for (double mu : {1.0, 10.0, 100.0}) {
    const auto f = make(mu);
    double peak = 0.0;
    Eigen::VectorXd col_peak = Eigen::VectorXd::Zero(14);
    for (const double tau : f.bundle.trajectory().times()) {
      peak = std::max(peak, suscept::total_jacobian(f.bundle, f.corr, tau).cwiseAbs().maxCoeff());
      const auto s = suscept::total_state_sensitivity(f.bundle, f.corr, tau);
      col_peak = col_peak.cwiseMax(s.cwiseAbs().colwise().maxCoeff().transpose());
    }
    const auto j1 = suscept::total_jacobian(f.bundle, f.corr, 1.0);
    EXPECT_LT(j1.cwiseAbs().maxCoeff(), 1e-6 * peak) << "mu = " << mu;

    // full state-valued sensitivity returns to (dx0, 0)
    const auto s1 = suscept::total_state_sensitivity(f.bundle, f.corr, 1.0);
    const auto s0 = suscept::total_state_sensitivity(f.bundle, f.corr, 0.0);
    for (Eigen::Index a = 0; a < s1.cols(); ++a) {
      EXPECT_LT((s1.col(a) - s0.col(a)).cwiseAbs().maxCoeff(), 1e-6 * col_peak[a]) << "mu = " << mu << ", a = " << a;
      EXPECT_EQ(s0(0, a), f.corr.dx0_da[a]);
      EXPECT_EQ(s0(1, a), 0.0);
    }
  }
}

TEST(TotalJacobian, LinearInCorrections) {
  const auto& f = mu1();
  auto doubled = f.corr;
  doubled.dx0_da *= 2.0;
  doubled.dT_da *= 2.0;
  for (double tau : {0.1, 0.5, 0.8}) {
    const Eigen::VectorXd b = f.bundle.basis(tau);
    const Eigen::VectorXd j = suscept::total_jacobian(f.bundle, f.corr, tau);
    const Eigen::VectorXd j2 = suscept::total_jacobian(f.bundle, doubled, tau);
    EXPECT_LT(((j2 - b.head(14)) - 2.0 * (j - b.head(14))).cwiseAbs().maxCoeff(), 1e-12);
  }
}

}  // namespace

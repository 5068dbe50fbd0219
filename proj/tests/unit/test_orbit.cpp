#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "suscept/error.hpp"
#include "suscept/orbit.hpp"
#include "suscept/scan.hpp"

namespace {

using suscept::ModelConfig;
using suscept::OrbitSettings;
using suscept::ParameterVector;

const suscept::IntegratorSettings kSettings{};

// One application of the section return map.
suscept::State return_map(const ModelConfig& cfg, const suscept::State& z) {
  suscept::Vector z0(2);
  z0 << z.x, z.y;
  const auto c = suscept::integrate_to_crossing(
      suscept::planar_field(cfg, ParameterVector::zeros(cfg.order)), z0, 0.0, suscept::return_time_bound(cfg.mu),
      [](double, const suscept::Vector& y) { return y[1]; }, suscept::Direction::Rising, kSettings);
  return {c.state[0], 0.0};
}

TEST(Settle, MuOneAmplitudeNearTwo) {
  const auto anchor = suscept::settle({1.0, 4}, ParameterVector::zeros(4), {2.0, 0.0}, kSettings);
  EXPECT_EQ(anchor.y, 0.0);
  EXPECT_GT(anchor.x, 1.9);
  EXPECT_LT(anchor.x, 2.1);
}

TEST(Settle, AnchorIsFixedPoint) {
  const ModelConfig cfg{1.0, 4};
  const auto anchor = suscept::settle(cfg, ParameterVector::zeros(4), {2.0, 0.0}, kSettings);
  const auto again = suscept::settle(cfg, ParameterVector::zeros(4), anchor, kSettings);
  EXPECT_NEAR(again.x, anchor.x, 1e-9);
}

TEST(Settle, MuHundredStableUnderLongerSettling) {
  const ModelConfig cfg{100.0, 4};
  const auto anchor = suscept::settle(cfg, ParameterVector::zeros(4), {2.0, 0.0}, kSettings);
  auto state = anchor;
  for (int k = 0; k < 50; ++k) state = return_map(cfg, state);
  EXPECT_NEAR(state.x, anchor.x, 1e-4);
}

TEST(Settle, WeakContractionSettlesToSameAnchorFromBothSides) {
  const ModelConfig cfg{0.3, 4};
  OrbitSettings orbit;
  orbit.max_periods = 2000;
  const auto inner = suscept::settle(cfg, ParameterVector::zeros(4), {1.5, 0.0}, kSettings, orbit);
  const auto outer = suscept::settle(cfg, ParameterVector::zeros(4), {2.5, 0.0}, kSettings, orbit);
  EXPECT_NEAR(inner.x, outer.x, 2e-9);
}

TEST(Settle, NonFiniteStartRejected) {
  EXPECT_THROW((void)suscept::settle({1.0, 4}, ParameterVector::zeros(4), {NAN, 0.0}, kSettings), suscept::Error);
}

TEST(Settle, WeakAttractionHitsPeriodCap) {
  OrbitSettings orbit;
  orbit.max_periods = 3;
  try {
    (void)suscept::settle({0.05, 4}, ParameterVector::zeros(4), {1.0, 0.0}, kSettings, orbit);
    FAIL() << "expected NoConvergence";
  } catch (const suscept::Error& e) {
    EXPECT_EQ(e.kind(), suscept::ErrorKind::NoConvergence);
  }
}

TEST(Period, MuOne) {
  const auto c = suscept::find_limit_cycle({1.0, 4}, ParameterVector::zeros(4), kSettings);
  EXPECT_NEAR(c.period, 6.663, 1e-3);
  EXPECT_LT(c.residual, 1e-9);
  EXPECT_GT(c.anchor.x, 0.0);
  EXPECT_EQ(c.anchor.y, 0.0);
}

TEST(Period, MuHundredRelaxationLimit) {
  const auto c = suscept::find_limit_cycle({100.0, 4}, ParameterVector::zeros(4), kSettings);
  // Slow-branch quadrature: 2 * int_1^2 (x - 1/x) dx = 3 - 2 ln 2.
  const double relaxation = 3.0 - 2.0 * std::numbers::ln2;
  EXPECT_LT(std::abs(c.period / relaxation - 1.0), 0.03);
  EXPECT_LT(c.residual, 1e-9);
}

TEST(Period, MuTenthHarmonicLimit) {
  OrbitSettings orbit;
  orbit.max_periods = 400;
  orbit.tolerance = 1e-8;
  const auto c = suscept::find_limit_cycle({0.1, 4}, ParameterVector::zeros(4), kSettings, orbit);
  EXPECT_LT(std::abs(c.period / (2.0 * std::numbers::pi / 0.1) - 1.0), 0.05);
}

TEST(Period, SectionInvariance) {
  for (double mu : {1.0, 10.0}) {
    OrbitSettings shifted;
    shifted.section_y = 0.1;
    shifted.seed = {2.0, 0.1};
    const auto a = suscept::find_limit_cycle({mu, 4}, ParameterVector::zeros(4), kSettings);
    const auto b = suscept::find_limit_cycle({mu, 4}, ParameterVector::zeros(4), kSettings, shifted);
    EXPECT_LT(std::abs(a.period / b.period - 1.0), 1e-8) << "mu = " << mu;
    EXPECT_EQ(b.anchor.y, 0.1);
  }
}

TEST(Period, ReturnMapContracts) {
  for (double mu : {1.0, 10.0}) {
    const ModelConfig cfg{mu, 4};
    suscept::State z0{2.4, 0.0};
    for (int k = 0; k < 3; ++k) {
      const auto z1 = return_map(cfg, z0);
      const auto z2 = return_map(cfg, z1);
      EXPECT_LE(std::abs(z2.x - z1.x), std::abs(z1.x - z0.x)) << "mu = " << mu;
      z0 = z1;
    }
  }
}

// T decreases towards the relaxation limit from above.
TEST(Period, MonotoneAcrossDefaultGrid) {
  const double relaxation = 3.0 - 2.0 * std::numbers::ln2;
  double prev = std::numeric_limits<double>::infinity();
  for (double mu : suscept::default_mu_grid()) {
    const auto c = suscept::find_limit_cycle({mu, 4}, ParameterVector::zeros(4), kSettings);
    EXPECT_LT(c.period, prev) << "mu = " << mu;
    EXPECT_GT(c.period, relaxation) << "mu = " << mu;
    prev = c.period;
  }
}

TEST(Orbit, ReturnTimeBoundCoversBothLimits) {
  EXPECT_GT(suscept::return_time_bound(0.1), 2.0 * std::numbers::pi / 0.1);
  EXPECT_GT(suscept::return_time_bound(100.0), 3.0 - 2.0 * std::numbers::ln2);
}

}  // namespace

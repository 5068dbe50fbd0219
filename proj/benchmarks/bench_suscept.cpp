#include <benchmark/benchmark.h>

#include "suscept/dynamics.hpp"
#include "suscept/integrate.hpp"
#include "suscept/orbit.hpp"
#include "suscept/scan.hpp"

namespace {

using suscept::ParameterVector;

void BM_Rhs(benchmark::State& state) {
  const suscept::VanDerPolField field({10.0, 4});
  const auto a = ParameterVector::unit(4, 7, 1e-3);
  suscept::State z{1.5, 0.3};
  for (auto _ : state) {
    const auto f = field.rhs(z, a);
    benchmark::DoNotOptimize(f);
    z.x += 1e-12;
  }
}
BENCHMARK(BM_Rhs);

void BM_ParamJacobian(benchmark::State& state) {
  const suscept::VanDerPolField field({10.0, 4});
  const suscept::State z{1.5, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(field.jacobian_params(z));
}
BENCHMARK(BM_ParamJacobian);

void BM_OnePeriod(benchmark::State& state) {
  const double mu = static_cast<double>(state.range(0));
  const suscept::ModelConfig cfg{mu, 4};
  const suscept::IntegratorSettings settings{};
  const auto cycle = suscept::find_limit_cycle(cfg, ParameterVector::zeros(4), settings);
  suscept::Vector z0(2);
  z0 << cycle.anchor.x, cycle.anchor.y;
  const auto field = suscept::planar_field(cfg, ParameterVector::zeros(4));
  for (auto _ : state) benchmark::DoNotOptimize(suscept::integrate(field, z0, 0.0, cycle.period, settings));
}
BENCHMARK(BM_OnePeriod)->Arg(1)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_AnalyzePoint(benchmark::State& state) {
  suscept::ScanConfig cfg;
  cfg.emit.clear();
  const double mu = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(suscept::analyze_point(mu, cfg));
}
BENCHMARK(BM_AnalyzePoint)->Arg(1)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

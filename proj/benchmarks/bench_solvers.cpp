#include <benchmark/benchmark.h>

#include "qscat/continuum.hpp"
#include "qscat/lattice.hpp"
#include "qscat/single_particle.hpp"
#include "qscat/two_body.hpp"

using namespace qscat;

namespace {

TransverseSpectrum box(double omega, int nc) {
  return solve_transverse(TrapSpec::harmonic(omega, (nc - 1) / 2), {.check_edges = false});
}

void BM_TransverseSolve(benchmark::State& state) {
  const auto spec = TrapSpec::harmonic(1e-3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_transverse(spec, {.check_edges = false}));
}
BENCHMARK(BM_TransverseSolve)->Arg(20)->Arg(200)->Arg(2000);

void BM_SingleParticleSweepPoint(benchmark::State& state) {
  const auto s = solve_transverse(TrapSpec::harmonic(1e-3, auto_half_width(Harmonic{1e-3}, 1)));
  const auto cir = u_cir(s, 0.0);
  double u = -3.0;
  for (auto _ : state) benchmark::DoNotOptimize(effective_u1d(s, u += 1e-9, cir));
}
BENCHMARK(BM_SingleParticleSweepPoint);

void BM_KernelBuild(benchmark::State& state) {
  const auto s = box(1e-3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel(s));
}
BENCHMARK(BM_KernelBuild)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_DirectSolve(benchmark::State& state) {
  const auto k = build_kernel(box(1e-3, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(solve_scattering_length(k, -2.0));
}
BENCHMARK(BM_DirectSolve)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_SpectralSolve(benchmark::State& state) {
  const auto k = build_kernel(box(1e-3, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_u1d(k, -2.0));
}
BENCHMARK(BM_SpectralSolve)->Arg(21)->Arg(41);

void BM_BornSeries100(benchmark::State& state) {
  const auto k = build_kernel(box(1e-3, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(born_series(k, -1.0, 100));
}
BENCHMARK(BM_BornSeries100)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_ContinuumQuadrature(benchmark::State& state) {
  const double v0 = 1.0;
  const auto well = WellProfile::from_trap(TrapSpec::delta_well(v0, 1));
  ContinuumOptions opt;
  opt.trapezoid_points = 0;
  for (auto _ : state) benchmark::DoNotOptimize(continuum_sum(well, v0 - std::sqrt(v0 * v0 + 4.0), 0.0, opt));
}
BENCHMARK(BM_ContinuumQuadrature)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

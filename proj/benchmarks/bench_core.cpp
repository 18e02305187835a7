#include <benchmark/benchmark.h>

#include "qtraj/bell.hpp"
#include "qtraj/factorization.hpp"
#include "qtraj/green.hpp"
#include "qtraj/opensys.hpp"
#include "qtraj/sampling.hpp"

using namespace qtraj;

// Structured apply versus the dense product it replaces.
static void BM_BathApplyFFT(benchmark::State& state) {
  const ContourGrid grid(10.0, static_cast<std::size_t>(state.range(0)));
  const BathFactorization bath(grid, 1.0);
  auto ws = bath.make_workspace();
  const std::size_t n = bath.dimension();
  RngStream rng(1, 0);
  const ComplexVector g = sample_gamma(n, rng);
  std::vector<cplx> a(n), s(n);
  for (auto _ : state) {
    bath.apply({g.data(), n}, a, s, ws);
    benchmark::DoNotOptimize(a.data());
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_BathApplyFFT)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

static void BM_BathApplyDense(benchmark::State& state) {
  const ContourGrid grid(10.0, static_cast<std::size_t>(state.range(0)));
  const Factorization f = BathFactorization(grid, 1.0).dense();
  RngStream rng(1, 0);
  const ComplexVector g = sample_gamma(f.rank(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(quasitrajectory_from_gamma(f, g));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(f.dimension()));
}
BENCHMARK(BM_BathApplyDense)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

static void BM_BathSvd(benchmark::State& state) {
  const ContourGrid grid(10.0, static_cast<std::size_t>(state.range(0)));
  const GreenMatrix g = bath_green_single_mode(grid, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(factorize_svd(g));
}
BENCHMARK(BM_BathSvd)->Arg(20)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_PdcTakagi(benchmark::State& state) {
  const DoubledCovariance c = pdc_contour_covariance(1.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(factorize_takagi(c));
}
BENCHMARK(BM_PdcTakagi);

static void BM_BellSamples(benchmark::State& state) {
  BellConfig cfg;
  cfg.n_samples = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(intensity_moments_mc(cfg, 0.5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BellSamples)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_CoherentTrajectory(benchmark::State& state) {
  OpenSystemConfig cfg;
  cfg.steps = static_cast<std::size_t>(state.range(0));
  cfg.output_stride = 100;
  const ContourGrid grid(cfg.t_final, cfg.steps);
  const BathFactorization bath(grid, cfg.omega);
  auto ws = bath.make_workspace();
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_trajectory(cfg, bath, i++, ws));
}
BENCHMARK(BM_CoherentTrajectory)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

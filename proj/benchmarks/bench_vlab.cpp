#include <benchmark/benchmark.h>

#include "vlab/analytics.hpp"
#include "vlab/fields.hpp"
#include "vlab/point_vortex.hpp"
#include "vlab/solver.hpp"
#include "vlab/spectral_lab.hpp"

using namespace vlab;

namespace {

ScalarField2D pair_field(int n) {
  const GridSpec g(n, 4.0);
  return superposition(VortexConfiguration({{-0.5, 0.0}, {0.5, 0.0}}, {1.0, 1.0}), 1e-3, 1.0, g);
}

void BM_BiotSavartPeriodic(benchmark::State& state) {
  const ScalarField2D w = pair_field(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(biot_savart(w));
}
BENCHMARK(BM_BiotSavartPeriodic)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BiotSavartFreeSpace(benchmark::State& state) {
  const ScalarField2D w = pair_field(static_cast<int>(state.range(0)));
  biot_savart(w, BiotSavart::FreeSpace);  // builds the cached kernel
  for (auto _ : state) benchmark::DoNotOptimize(biot_savart(w, BiotSavart::FreeSpace));
}
BENCHMARK(BM_BiotSavartFreeSpace)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SolverStep(benchmark::State& state) {
  ScalarField2D w = pair_field(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    w = step(w, 1e-4, 1e-3);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_SolverStep)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_IntegratePw(benchmark::State& state) {
  const VortexConfiguration c({{0, 0}, {1, 0}, {0.3, 0.8}, {-0.6, 0.4}}, {1.0, 0.6, 1.4, -0.5});
  for (auto _ : state) benchmark::DoNotOptimize(integrate(Rhs::pw(), c, 0.0, 1.0, 1e-4, 1 << 30));
}
BENCHMARK(BM_IntegratePw)->Unit(benchmark::kMillisecond);

void BM_ModeSpectrum(benchmark::State& state) {
  ModeDiscretization d;
  d.basis_size = static_cast<int>(state.range(0));
  mode_blocks(2, d);
  for (auto _ : state) benchmark::DoNotOptimize(mode_spectrum(build_mode_operator(2, 32.0, d), 4));
}
BENCHMARK(BM_ModeSpectrum)->Arg(64)->Arg(96)->Arg(192)->Unit(benchmark::kMillisecond);

void BM_BoundsAt(benchmark::State& state) {
  const ModeDiscretization d;
  BoundsOptions o;
  o.n_max = 4;
  for (int n = 1; n <= o.n_max; ++n) mode_blocks(n, d);
  for (auto _ : state) benchmark::DoNotOptimize(bounds_at(static_cast<double>(state.range(0)), d, o));
}
BENCHMARK(BM_BoundsAt)->Arg(8)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

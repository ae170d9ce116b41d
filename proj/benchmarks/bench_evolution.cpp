#include <benchmark/benchmark.h>

#include "rsf/evolution.hpp"
#include "rsf/fock.hpp"
#include "rsf/state_factory.hpp"

namespace {

rsf::GeneratorSpec damped_generator(rsf::Index n) {
  rsf::ThermalBathSpec bath{0.1, 1.0, {}};
  for (rsf::Index k = 0; k < n; ++k) bath.coupled_modes.push_back(k);
  rsf::GeneratorSpec g = rsf::bath_generator(bath, n);
  for (rsf::Index k = 0; k < n; ++k) g.h(k, k) = 0.3 * double(k);
  return g;
}

void BM_ReducedRhs(benchmark::State& state) {
  const rsf::Index n = state.range(0);
  rsf::ReducedState s =
      n == 4 ? rsf::build(rsf::StatePreset::bsv(0.5)) : rsf::ReducedState::vacuum(n);
  rsf::GeneratorSpec g = damped_generator(n);
  for (auto _ : state) benchmark::DoNotOptimize(rsf::rhs(s, g));
}
BENCHMARK(BM_ReducedRhs)->Arg(4)->Arg(8)->Arg(16);

void BM_ReducedIntegrate(benchmark::State& state) {
  rsf::ReducedState s = rsf::build(rsf::StatePreset::bsv(0.5));
  rsf::GeneratorSpec g = damped_generator(4);
  auto grid = rsf::uniform_grid(1.0, 10);
  for (auto _ : state) benchmark::DoNotOptimize(rsf::integrate(s, g, grid));
}
BENCHMARK(BM_ReducedIntegrate);

void BM_FockRhs(benchmark::State& state) {
  const rsf::Index cutoff = state.range(0);
  rsf::FockBasis basis(2, cutoff);
  rsf::FockState f = rsf::prepare(basis, rsf::StatePreset::thermal({0.2, 0.2}));
  rsf::GeneratorSpec g = damped_generator(2);
  for (auto _ : state) benchmark::DoNotOptimize(rsf::gkls_rhs(f, g));
}
BENCHMARK(BM_FockRhs)->Arg(4)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();

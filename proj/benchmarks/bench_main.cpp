#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "snls/ensemble.hpp"
#include "snls/integrator.hpp"
#include "snls/measures.hpp"
#include "snls/noise.hpp"

namespace {

snls::Grid desk_grid(int n = 64) { return snls::Grid(1, 2.0 * std::numbers::pi, n); }

void BM_Step(benchmark::State& state) {
  snls::SimConfig cfg{desk_grid(static_cast<int>(state.range(1)))};
  cfg.sigma = static_cast<double>(state.range(0));
  const auto phi = snls::NoiseOperator::band(cfg.grid, 0.1, 8, 2.0);
  snls::Stepper stepper(cfg, phi);
  snls::NoiseStream stream(1, 0);
  snls::SpectralField u(cfg.grid);
  for (auto _ : state) {
    stepper.advance(u, stream);
    benchmark::DoNotOptimize(u.coeffs().data());
  }
}
BENCHMARK(BM_Step)->Args({0, 64})->Args({1, 64})->Args({1, 256})->Args({2, 64});

void BM_RoundTrip(benchmark::State& state) {
  const auto grid = desk_grid(static_cast<int>(state.range(0)));
  snls::SpectralField u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = {1.0 / (1.0 + i), 0.5};
  snls::PhysicalField buf(grid.size());
  for (auto _ : state) {
    snls::to_physical(u, buf);
    snls::to_spectral(buf, u);
    benchmark::DoNotOptimize(u.coeffs().data());
  }
}
BENCHMARK(BM_RoundTrip)->Arg(64)->Arg(1024);

void BM_NormalPair(benchmark::State& state) {
  snls::NoiseStream stream(42, 3);
  std::uint32_t slot = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream.normal_pair(slot++));
  }
}
BENCHMARK(BM_NormalPair);

void BM_Wasserstein(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n), b(n);
  for (auto& v : a) v = g(rng);
  for (auto& v : b) v = 0.5 + g(rng);
  const auto ma = snls::EmpiricalMeasure::uniform(a);
  const auto mb = snls::EmpiricalMeasure::uniform(b);
  for (auto _ : state) benchmark::DoNotOptimize(snls::wasserstein1(ma, mb));
}
BENCHMARK(BM_Wasserstein)->Arg(1000)->Arg(100000);

void BM_Ensemble(benchmark::State& state) {
  snls::SimConfig cfg{desk_grid()};
  cfg.sigma = 1.0;
  const auto phi = snls::NoiseOperator::band(cfg.grid, 0.1, 8, 2.0);
  snls::RecordOptions opt;
  opt.workers = 1;
  for (auto _ : state) {
    auto rec = snls::run_ensemble(cfg, phi, snls::InitialLaw::zero(), 4, snls::Schedule::uniform(1.0, 0.1), opt);
    benchmark::DoNotOptimize(rec.trajectories());
  }
}
BENCHMARK(BM_Ensemble)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

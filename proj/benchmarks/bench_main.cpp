#include <benchmark/benchmark.h>

#include "ksmz/bdf.hpp"
#include "ksmz/reduced.hpp"
#include "ksmz/rng.hpp"

using namespace ksmz;

namespace {

const SpectralParams kParams(0.085, 24);

ModeState bench_state() {
  RandomStream rng(7);
  ModeState s(kParams);
  for (int k = 1; k <= kParams.max_pos(); ++k) {
    const Complex u(rng.uniform(-1, 1), rng.uniform(-1, 1));
    s.at(k, kParams) = u;
    s.at(-k, kParams) = std::conj(u);
  }
  return s;
}

DiagonalGaussian bench_density() {
  std::vector<Complex> mu;
  std::vector<double> a;
  for (int k = 1; k <= kParams.max_pos(); ++k) {
    mu.emplace_back(0.02 / k, 0.0);
    a.push_back(0.5 / (k * k));
  }
  return DiagonalGaussian(kParams, mu, a);
}

void BM_ks_rhs(benchmark::State& state) {
  Convolver conv(kParams);
  const ModeState s = bench_state();
  for (auto _ : state) benchmark::DoNotOptimize(conv.rhs(s));
}
BENCHMARK(BM_ks_rhs);

void BM_ks_jacobian(benchmark::State& state) {
  const ModeState s = bench_state();
  for (auto _ : state) benchmark::DoNotOptimize(ks_jacobian(s, kParams));
}
BENCHMARK(BM_ks_jacobian);

void BM_bdf_unit_time(benchmark::State& state) {
  const ModeState ic = bench_state();
  BdfConfig cfg;
  cfg.tol = 1e-7;
  cfg.dt_init = 1e-6;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_to(ic, 1.0, cfg, kParams));
}
BENCHMARK(BM_bdf_unit_time);

void BM_markovian_rhs(benchmark::State& state) {
  const DiagonalGaussian g = bench_density();
  const Partition p = make_set1(kParams);
  const MarkovianModel mm(g, p);
  RandomStream rng(3);
  std::vector<Complex> pos;
  for (std::size_t i = 0; i < 5; ++i) pos.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
  const ResolvedVec hat(p, pos);
  for (auto _ : state)
    for (int j = 1; j <= 5; ++j) benchmark::DoNotOptimize(markovian_rhs(mm, hat, j));
}
BENCHMARK(BM_markovian_rhs);

void BM_memory_integral(benchmark::State& state) {
  const DiagonalGaussian g = bench_density();
  const Partition p = make_set1(kParams);
  ProjectionSpec spec;
  spec.kind = ProjectionSpec::Kind::Linear;
  MemoryKernel kern = MemoryKernel::zero(g, p, spec, 0.01, 1.0);
  for (auto& K : kern.K) K.setConstant(Complex(0.1, -0.05));
  HistoryBuffer history(0.001, 1.01);
  const std::vector<Complex> v(5, Complex(0.5, 0.2));
  for (int i = 0; i <= 1500; ++i) history.push(i * 0.001, v);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        memory_integral(history, v, 1.5, kern, nullptr, ReducedRunConfig::Quadrature::Simpson, 1.0));
}
BENCHMARK(BM_memory_integral);

}  // namespace

BENCHMARK_MAIN();

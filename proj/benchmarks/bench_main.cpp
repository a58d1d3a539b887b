#include <numbers>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dhym/flow.hpp"
#include "dhym/lemma_checks.hpp"
#include "dhym/regularize.hpp"

namespace {

using namespace dhym;

std::vector<PhaseVector> cone_samples(int n, int count) {
  const double Theta = 0.9272952180016122 + std::numbers::pi / 2;
  ConeSampler s(n, ConeSpec(Theta - 0.2, Theta));
  std::vector<PhaseVector> out;
  for (int i = 0; i < count; ++i) out.push_back(s.next());
  return out;
}

CalibrationData diag_class(int n, int N, double lambda) {
  return compute_theta0(constant_field(TorusGrid(n, N), CMatrix::Identity(n, n) * lambda));
}

void BM_FEps(benchmark::State& state) {
  const auto xs = cone_samples(static_cast<int>(state.range(0)), 256);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(f_eps(xs[i++ % xs.size()], 1e-3));
}
BENCHMARK(BM_FEps)->Arg(2)->Arg(4)->Arg(6);

void BM_GradFEps(benchmark::State& state) {
  const auto xs = cone_samples(static_cast<int>(state.range(0)), 256);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(grad_f_eps(xs[i++ % xs.size()], 1e-3));
}
BENCHMARK(BM_GradFEps)->Arg(2)->Arg(4)->Arg(6);

void BM_HessFEps(benchmark::State& state) {
  const auto xs = cone_samples(static_cast<int>(state.range(0)), 256);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(hess_f_eps(xs[i++ % xs.size()], 1e-3));
}
BENCHMARK(BM_HessFEps)->Arg(2)->Arg(4)->Arg(6);

void BM_ComplexHessian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TorusGrid g(n, static_cast<int>(state.range(1)));
  PeriodicBump b{0.2, {1.0, 2.0, 3.0, 1.5}, 0.8};
  const Potential phi = bump_potential(g, std::span(&b, 1));
  for (auto _ : state) benchmark::DoNotOptimize(complex_hessian(phi));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * g.size()));
}
BENCHMARK(BM_ComplexHessian)->Args({1, 128})->Args({2, 16});

void BM_FlowStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CalibrationData cal = diag_class(n, static_cast<int>(state.range(1)), 2.0);
  PeriodicBump b{0.2, {3.0, 3.0, 3.0, 3.0}, 0.8};
  const Potential phi = bump_potential(cal.grid(), std::span(&b, 1));
  const double dt = cfl_dt(cal.grid(), evaluate_rhs(cal, phi, 1e-3).max_grad, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(step(cal, phi, dt, 1e-3));
}
BENCHMARK(BM_FlowStep)->Args({1, 64})->Args({2, 8})->Unit(benchmark::kMillisecond);

void BM_RegularizedMax(benchmark::State& state) {
  std::mt19937_64 rng(kDefaultSeed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> tuples(256, std::vector<double>(static_cast<std::size_t>(state.range(0))));
  for (auto& t : tuples)
    for (double& x : t) x = 0.1 * u(rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(regularized_max(tuples[i++ % tuples.size()], 0.05));
}
BENCHMARK(BM_RegularizedMax)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();

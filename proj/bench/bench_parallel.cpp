// Serial reference vs OpenMP paths. Each benchmark takes the execution mode
// as its argument: 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "lobmkl/backtest.hpp"
#include "lobmkl/kernels.hpp"
#include "lobmkl/mkl.hpp"
#include "lobmkl/significance.hpp"

using namespace lobmkl;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureMatrix m;
  m.rows.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows.size(); ++i) m.rows.data()[i] = n(rng);
  return m;
}

void BM_GramRbf(benchmark::State& state) {
  const auto x = random_matrix(static_cast<std::size_t>(state.range(1)), 11, 1);
  for (auto _ : state) benchmark::DoNotOptimize(gram(x, RbfKernel{10.0}, mode(state)));
}
BENCHMARK(BM_GramRbf)->ArgsProduct({{0, 1}, {100, 800}})->Unit(benchmark::kMicrosecond);

void BM_GramArcsin(benchmark::State& state) {
  const auto x = random_matrix(static_cast<std::size_t>(state.range(1)), 11, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gram(x, ArcsinNetKernel{1.0}, mode(state)));
}
BENCHMARK(BM_GramArcsin)->ArgsProduct({{0, 1}, {100, 800}})->Unit(benchmark::kMicrosecond);

void BM_MklGradient(benchmark::State& state) {
  const auto x = random_matrix(100, 6, 3);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.rows(static_cast<Eigen::Index>(i), 0) > 0 ? 1 : -1;
  MKLProblem p;
  p.labels = y;
  for (const auto& spec : default_kernel_bank(x))
    for (int copy = 0; copy < 8; ++copy) p.grams.push_back(gram(x, spec, Execution::Serial));
  const Eigen::VectorXd d = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p.grams.size()),
                                                      1.0 / static_cast<double>(p.grams.size()));
  for (auto _ : state) benchmark::DoNotOptimize(objective_and_gradient(p, d, 1e-6, std::nullopt, mode(state)));
}
BENCHMARK(BM_MklGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<WindowBaseline> windows(40);
  for (auto& w : windows) {
    w.class_proportions = {0.3, 0.3, 0.4};
    for (std::size_t i = 0; i < 60; ++i) {
      w.possible_indices.push_back(i);
      w.true_classes.push_back(static_cast<Direction>(rng() % 3));
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_pvalue(windows, 900, 10000, 1, mode(state)));
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Backtest(benchmark::State& state) {
  SynthConfig s;
  s.n_snapshots = 700;
  s.drift_coupling = 2.0;
  const auto series = generate_synthetic(s);
  BacktestConfig cfg;
  cfg.horizons = {10};
  cfg.model = SingleKernelSpec{5, 1};
  for (auto _ : state) benchmark::DoNotOptimize(run_backtest(series, cfg, mode(state)));
}
BENCHMARK(BM_Backtest)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

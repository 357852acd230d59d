// Serial vs OpenMP throughput for the parallel hot paths, plus the two
// Lyapunov solvers.
#include "hico/behavior.hpp"
#include "hico/evolution.hpp"
#include "hico/lyapunov.hpp"
#include "hico/rng.hpp"
#include "hico/synth.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace hico;

const SynthCohort& cohort() {
  static const SynthCohort c = [] {
    SynthConfig cfg;
    cfg.n_subjects = 1;
    cfg.seed = 7;
    return synth_cohort(cfg, default_truth());
  }();
  return c;
}

std::vector<Genome> random_population(int n, int length) {
  RngStream rng(11);
  std::vector<Genome> pop(n);
  for (auto& g : pop) {
    g.genes.resize(length);
    for (auto& x : g.genes) x = static_cast<int>(rng.next_int(kGeneLevels));
  }
  return pop;
}

void BM_EvaluatePopulation(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const auto& c = cohort();
  const Evaluator eval =
      make_evaluator(Backend::Moments, ParamRanges::defaults(), c.cohort.parcellation, c.cohort.subjects[0]);
  const auto pop = random_population(100, kHeterogeneousLength);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_population(pop, eval, parallel));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pop.size()));
}
BENCHMARK(BM_EvaluatePopulation)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_PermutationTest(benchmark::State& state) {
  PermutationOptions opts;
  opts.parallel = state.range(0) != 0;
  RngStream rng(3);
  Matrix X(100, 20);
  Vector y(100);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.next_gaussian();
    y[i] = X(i, 0) + rng.next_gaussian();
  }
  for (auto _ : state) benchmark::DoNotOptimize(permutation_test(X, y, 1.0, 1000, 5, opts));
}
BENCHMARK(BM_PermutationTest)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

Matrix stable_matrix(int n) {
  RngStream rng(static_cast<std::uint64_t>(n));
  Matrix A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.next_gaussian() / std::sqrt(static_cast<double>(n));
  }
  A.diagonal().array() -= 2.0;
  return A;
}

void BM_LyapunovBartelsStewart(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix A = stable_matrix(n);
  const Matrix Q = Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(A, Q));
}
BENCHMARK(BM_LyapunovBartelsStewart)->Arg(14)->Arg(56)->Unit(benchmark::kMicrosecond);

void BM_LyapunovKronecker(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix A = stable_matrix(n);
  const Matrix Q = Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov_kronecker(A, Q));
}
BENCHMARK(BM_LyapunovKronecker)->Arg(14)->Arg(56)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

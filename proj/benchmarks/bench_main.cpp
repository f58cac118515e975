#include <benchmark/benchmark.h>

#include "thlx/core_model.hpp"
#include "thlx/dantzig.hpp"
#include "thlx/diagnostics.hpp"
#include "thlx/ensembles.hpp"
#include "thlx/lasso.hpp"
#include "thlx/rng.hpp"

namespace {

using namespace thlx;

struct Problem {
  DesignMatrix X;
  Vector Y;
};

Problem make_problem(Index n, Index p, Index s) {
  RandomSource source(7);
  auto rng = source.stream(1);
  EnsembleSpec spec{EnsembleKind::iid_gaussian, n, p, 0.0, true};
  DesignMatrix X = gen_design(spec, rng);
  auto beta_rng = source.stream(2);
  const Signal beta = gen_beta_spiked(p, s, beta_rng);
  auto noise_rng = source.stream(3);
  Vector Y = gen_observation(X, beta, NoiseSpec(1.0), noise_rng);
  return {std::move(X), std::move(Y)};
}

void BM_SoftThreshold(benchmark::State& state) {
  double z = 1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(soft_threshold(z, 1.0));
    z += 1e-9;
  }
}
BENCHMARK(BM_SoftThreshold);

void BM_FitLasso(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const auto p = static_cast<Index>(state.range(1));
  const auto prob = make_problem(n, p, p / 20);
  const double lambda = 0.2 * lambda_max(prob.X, prob.Y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_lasso(prob.X, prob.Y, lambda));
  }
}
BENCHMARK(BM_FitLasso)->Args({100, 400})->Args({200, 1000});

void BM_LassoPath(benchmark::State& state) {
  const auto prob = make_problem(100, 400, 20);
  const auto grid = default_lambda_grid(prob.X, prob.Y, 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lasso_path(prob.X, prob.Y, grid));
  }
}
BENCHMARK(BM_LassoPath);

void BM_FitDantzigSimplex(benchmark::State& state) {
  const auto p = static_cast<Index>(state.range(0));
  const auto prob = make_problem(p / 2, p, p / 16);
  const double lambda = 0.3 * lambda_max(prob.X, prob.Y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_dantzig(prob.X, prob.Y, lambda));
  }
}
BENCHMARK(BM_FitDantzigSimplex)->Arg(32)->Arg(64);

void BM_SparseEigsExhaustive(benchmark::State& state) {
  const auto prob = make_problem(12, 8, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sparse_eigs(prob.X, 3, ScanMode::exhaustive));
  }
}
BENCHMARK(BM_SparseEigsExhaustive);

}  // namespace

BENCHMARK_MAIN();

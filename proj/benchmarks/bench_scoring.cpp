// Scoring hot paths: the displacement-pass K against the quadratic oracle,
// across typical fixation-grid sizes.

#include <benchmark/benchmark.h>

#include "fsum/matrix.hpp"
#include "fsum/rng.hpp"
#include "fsum/scoring.hpp"

namespace {

fsum::Matrix random_map(int rows, int cols, uint64_t seed) {
  fsum::Matrix m(rows, cols);
  fsum::Rng rng(seed);
  for (double& v : m.values) v = rng.uniform01();
  return m;
}

void BM_WeightedKScore(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const fsum::Matrix map = random_map(side, side, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::weighted_k_score(map));
  }
}
BENCHMARK(BM_WeightedKScore)->Arg(8)->Arg(12)->Arg(16);

void BM_BruteForceOracle(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const fsum::Matrix map = random_map(side, side, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::brute_force_oracle(map));
  }
}
BENCHMARK(BM_BruteForceOracle)->Arg(8)->Arg(12)->Arg(16);

void BM_RipleyKAll(benchmark::State& state) {
  const fsum::Matrix map = random_map(9, 12, 11);  // the 800x600 grid shape
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::ripley_k_all(map, 10));
  }
}
BENCHMARK(BM_RipleyKAll);

}  // namespace

BENCHMARK_MAIN();

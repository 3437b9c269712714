// Statistics costs at full study scale (277 images): plain correlation,
// bootstrap CIs, and the paired delta test that dominates analyze runtime.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fsum/analysis.hpp"
#include "fsum/rng.hpp"

namespace {

struct Sample {
  std::vector<double> x, y, z;
};

Sample correlated_sample(int n, uint64_t seed) {
  Sample s;
  fsum::Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    s.x.push_back(z1);
    s.y.push_back(0.5 * z1 + std::sqrt(0.75) * rng.normal());
    s.z.push_back(0.3 * z1 + rng.normal());
  }
  return s;
}

void BM_Pearson(benchmark::State& state) {
  const Sample s = correlated_sample(277, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::pearson(s.x, s.y));
  }
}
BENCHMARK(BM_Pearson);

void BM_BootstrapCI(benchmark::State& state) {
  const Sample s = correlated_sample(277, 1);
  const int n_boot = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::bootstrap_ci(s.x, s.y, n_boot, 42));
  }
}
BENCHMARK(BM_BootstrapCI)->Arg(1000)->Arg(10000);

void BM_PairedDelta(benchmark::State& state) {
  const Sample s = correlated_sample(277, 1);
  const int n_boot = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::paired_delta_test(s.x, s.z, s.y, n_boot, 42));
  }
}
BENCHMARK(BM_PairedDelta)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();

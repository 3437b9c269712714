// Foveation costs: pyramid construction (once per image) versus the
// per-fixation blend, which the map builder runs ~120 times per image.

#include <benchmark/benchmark.h>

#include "fsum/foveation.hpp"
#include "fsum/image.hpp"
#include "fsum/rng.hpp"

namespace {

fsum::ImageBuffer noise(int w, int h, int channels) {
  fsum::ImageBuffer image(w, h, channels);
  fsum::Rng rng(3);
  for (float& v : image.pixels) v = static_cast<float>(rng.uniform01());
  return image;
}

void BM_BuildPyramid(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const fsum::ImageBuffer image = noise(side, side * 3 / 4, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::build_pyramid(image, 6));
  }
}
BENCHMARK(BM_BuildPyramid)->Arg(256)->Arg(640)->Arg(1280);

void BM_FoveateFull(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const fsum::ImageBuffer image = noise(side, side * 3 / 4, 3);
  const fsum::FixationPoint fix{side / 2.0, side * 3 / 8.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::foveate(image, fix, {}));
  }
}
BENCHMARK(BM_FoveateFull)->Arg(256)->Arg(640);

void BM_FoveateWithSharedPyramid(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const fsum::ImageBuffer image = noise(side, side * 3 / 4, 3);
  const auto pyramid = fsum::build_pyramid(image, 6);
  const fsum::FixationPoint fix{side / 4.0, side / 4.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsum::foveate_with_pyramid(pyramid, fix, {}));
  }
}
BENCHMARK(BM_FoveateWithSharedPyramid)->Arg(256)->Arg(640);

}  // namespace

BENCHMARK_MAIN();

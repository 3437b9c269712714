#include <doctest.h>

#include <cmath>

#include "fsum/errors.hpp"
#include "fsum/foveation.hpp"
#include "fsum/image.hpp"
#include "test_util.hpp"

using namespace fsum;
using fsum::test::noise_image;

TEST_CASE("foveating a constant image reproduces it exactly") {
  for (const float value : {0.0f, 0.37f, 1.0f}) {
    const ImageBuffer image = ImageBuffer::constant(64, 48, 1, value);
    const ImageBuffer out = foveate(image, {32.0, 24.0}, {});
    REQUIRE(out.pixels.size() == image.pixels.size());
    for (const float v : out.pixels) CHECK(v == value);  // bitwise
  }
  // Odd dimensions exercise the reflect-101 parity handling end to end.
  const ImageBuffer odd = ImageBuffer::constant(45, 33, 3, 0.6f);
  const ImageBuffer out = foveate(odd, {7.25, 30.5}, {});
  for (const float v : out.pixels) CHECK(v == 0.6f);
}

TEST_CASE("foveal region keeps near-perfect fidelity") {
  const ImageBuffer image = noise_image(96, 96, 11);
  const FoveationParams params{};
  const FixationPoint fix{48.0, 48.0};
  const ImageBuffer out = foveate(image, fix, params);
  const double radius = foveal_radius(image.width, params);
  REQUIRE(radius > 1.0);

  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double d = std::hypot(x - fix.x, y - fix.y);
      if (d <= radius) {
        CHECK(std::abs(out.at(x, y) - image.at(x, y)) <= 1.0 / 255.0);
      }
    }
  }
}

TEST_CASE("detail degrades monotonically with eccentricity") {
  // Mean squared gradient energy in concentric annuli must not increase
  // outward on white noise (noise has flat spatial statistics, so any trend
  // is the filter's doing).
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const ImageBuffer image = noise_image(128, 128, 1000 + seed);
    const FixationPoint fix{64.0, 64.0};
    const ImageBuffer out = foveate(image, fix, {});
    double prev = std::numeric_limits<double>::infinity();
    for (const double r : {0.0, 16.0, 32.0, 48.0}) {
      const double energy = annulus_gradient_energy(out, fix.x, fix.y, r, r + 16.0);
      CHECK(energy <= prev * (1.0 + 1e-9));
      prev = energy;
    }
  }
}

TEST_CASE("blend weights are convex at every pixel") {
  const FoveationParams params{};
  const BlendMap blend = compute_blend(80, 60, {12.5, 47.0}, params);
  REQUIRE(blend.levels == params.pyramid_levels);
  for (int y = 0; y < blend.height; ++y) {
    for (int x = 0; x < blend.width; ++x) {
      double sum = 0.0;
      for (int level = 0; level < blend.levels; ++level) {
        const float w = blend.weight(x, y, level);
        CHECK(w >= 0.0f);
        CHECK(w <= 1.0f);
        sum += w;
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("level cutoffs follow the closed form") {
  const FoveationParams params{};
  const auto cutoffs = level_cutoffs(params);
  REQUIRE(cutoffs.size() == static_cast<std::size_t>(params.pyramid_levels));
  // omega_i = min(1, sqrt(ln 2 / k) * sigma * 2^(3 - i))
  for (int i = 0; i < params.pyramid_levels; ++i) {
    const double expected = std::min(
        1.0, std::sqrt(std::log(2.0) / params.k) * params.sigma_base *
                 std::ldexp(1.0, 3 - i));
    CHECK(cutoffs[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(std::abs(cutoffs[0] - 0.9537) < 5e-4);  // frozen omega_0 reference
  for (std::size_t i = 1; i < cutoffs.size(); ++i) CHECK(cutoffs[i] < cutoffs[i - 1]);
}

TEST_CASE("pyramid levels keep the input dimensions") {
  const ImageBuffer image = noise_image(70, 50, 3);
  const auto pyramid = build_pyramid(image, 6);
  REQUIRE(pyramid.size() == 6);
  for (const ImageBuffer& level : pyramid) {
    CHECK(level.width == image.width);
    CHECK(level.height == image.height);
    CHECK(level.channels == image.channels);
  }
  // Deeper levels are smoother: gradient energy decreases.
  double prev = std::numeric_limits<double>::infinity();
  for (const ImageBuffer& level : pyramid) {
    double energy = 0.0;
    for (const float g : gradient_magnitude(level)) energy += double(g) * g;
    CHECK(energy <= prev);
    prev = energy;
  }
}

TEST_CASE("pyramid rejects images smaller than its deepest level") {
  const ImageBuffer tiny = noise_image(16, 16, 1);
  CHECK_THROWS_AS(build_pyramid(tiny, 6), DimensionError);
  CHECK_NOTHROW(build_pyramid(noise_image(32, 32, 1), 6));
}

TEST_CASE("fixation outside the image is rejected") {
  const ImageBuffer image = noise_image(64, 64, 9);
  CHECK_THROWS_AS(foveate(image, {-1.0, 10.0}, {}), BoundsError);
  CHECK_THROWS_AS(foveate(image, {10.0, 64.0}, {}), BoundsError);
}

TEST_CASE("parameter validation") {
  FoveationParams params;
  params.pyramid_levels = 1;
  CHECK_THROWS_AS(params.validate(), ConfigError);
  params = {};
  params.sigma_base = 0.0;
  CHECK_THROWS_AS(params.validate(), ConfigError);
  params = {};
  params.alpha = -2.0;
  CHECK_THROWS_AS(params.validate(), ConfigError);
  CHECK_NOTHROW(FoveationParams{}.validate());
}

TEST_CASE("p_scale defaults to half the image width") {
  FoveationParams params;
  CHECK(params.resolved_p_scale(800) == doctest::Approx(400.0));
  params.p_scale = 123.0;
  CHECK(params.resolved_p_scale(800) == doctest::Approx(123.0));
}

TEST_CASE("shared-pyramid foveation matches the one-shot API") {
  const ImageBuffer image = noise_image(64, 64, 21);
  const FoveationParams params{};
  const auto pyramid = build_pyramid(image, params.pyramid_levels);
  const FixationPoint fix{20.0, 40.0};
  const ImageBuffer a = foveate(image, fix, params);
  const ImageBuffer b = foveate_with_pyramid(pyramid, fix, params);
  REQUIRE(a.pixels.size() == b.pixels.size());
  for (std::size_t i = 0; i < a.pixels.size(); ++i) CHECK(a.pixels[i] == b.pixels[i]);
}

TEST_CASE("peripheral fixation blurs the far corner more than the near one") {
  const ImageBuffer image = noise_image(128, 96, 31);
  const ImageBuffer out = foveate(image, {8.0, 8.0}, {});
  const double near_energy = annulus_gradient_energy(out, 8.0, 8.0, 0.0, 24.0);
  const double far_energy = annulus_gradient_energy(out, 120.0, 88.0, 0.0, 24.0);
  CHECK(far_energy < near_energy);
}

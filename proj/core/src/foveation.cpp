#include "fsum/foveation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fsum/errors.hpp"

namespace fsum {

namespace {

// reflect-101: border pixel not repeated (..., p2, p1 | p0, p1, p2, ...)
int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0)
      i = -i;
    else
      i = 2 * n - 2 - i;
  }
  return i;
}

// Binomial 5-tap smoothing, separable, double accumulation so that a
// constant image passes through bit-exactly.
ImageBuffer gauss5(const ImageBuffer& src) {
  const int w = src.width, h = src.height, ch = src.channels;
  ImageBuffer tmp(w, h, ch), dst(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double a = src.at(reflect(x - 2, w), y, c);
        double b = src.at(reflect(x - 1, w), y, c);
        double m = src.at(x, y, c);
        double d = src.at(reflect(x + 1, w), y, c);
        double e = src.at(reflect(x + 2, w), y, c);
        tmp.at(x, y, c) =
            static_cast<float>((a + 4.0 * b + 6.0 * m + 4.0 * d + e) * (1.0 / 16.0));
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double a = tmp.at(x, reflect(y - 2, h), c);
        double b = tmp.at(x, reflect(y - 1, h), c);
        double m = tmp.at(x, y, c);
        double d = tmp.at(x, reflect(y + 1, h), c);
        double e = tmp.at(x, reflect(y + 2, h), c);
        dst.at(x, y, c) =
            static_cast<float>((a + 4.0 * b + 6.0 * m + 4.0 * d + e) * (1.0 / 16.0));
      }
    }
  }
  return dst;
}

ImageBuffer decimate2(const ImageBuffer& src) {
  const int w = (src.width + 1) / 2, h = (src.height + 1) / 2;
  ImageBuffer dst(w, h, src.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < src.channels; ++c)
        dst.at(x, y, c) = src.at(2 * x, 2 * y, c);
  return dst;
}

// Zero-insert then 5-tap interpolation (kernel sums to 1 on each parity).
// target_w/h select between 2n and 2n-1 so odd parent sizes round-trip.
// Reflection happens in the zero-inserted index space, which preserves parity
// and therefore keeps constants exact at the borders.
ImageBuffer upsample2(const ImageBuffer& src, int target_w, int target_h) {
  const int ch = src.channels;
  ImageBuffer zx(target_w, src.height, ch, 0.0f);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < target_w; ++x) {
      for (int c = 0; c < ch; ++c) {
        auto sample = [&](int i) -> double {
          i = reflect(i, target_w);
          return i % 2 == 0 ? src.at(i / 2, y, c) : 0.0;
        };
        double a = sample(x - 2);
        double b = sample(x - 1);
        double m = sample(x);
        double d = sample(x + 1);
        double e = sample(x + 2);
        zx.at(x, y, c) =
            static_cast<float>((a + 4.0 * b + 6.0 * m + 4.0 * d + e) * (1.0 / 8.0));
      }
    }
  }
  ImageBuffer dst(target_w, target_h, ch);
  for (int y = 0; y < target_h; ++y) {
    for (int x = 0; x < target_w; ++x) {
      for (int c = 0; c < ch; ++c) {
        auto sample = [&](int i) -> double {
          i = reflect(i, target_h);
          return i % 2 == 0 ? zx.at(x, i / 2, c) : 0.0;
        };
        double a = sample(y - 2);
        double b = sample(y - 1);
        double m = sample(y);
        double d = sample(y + 1);
        double e = sample(y + 2);
        dst.at(x, y, c) =
            static_cast<float>((a + 4.0 * b + 6.0 * m + 4.0 * d + e) * (1.0 / 8.0));
      }
    }
  }
  return dst;
}

struct PixelBlend {
  int sharp_level;
  int blur_level;   // == sharp_level in pure regions
  float sharp_weight;
};

double transfer(int level, double falloff, const FoveationParams& p) {
  double t = std::ldexp(1.0, level - 3) * falloff / p.sigma_base;
  return std::exp(-t * t * p.k);
}

PixelBlend blend_at(double dist, double p_scale, const FoveationParams& p,
                    const std::vector<double>& omega) {
  const int levels = p.pyramid_levels;
  double falloff = p.alpha / (dist / p_scale + p.alpha);
  if (falloff >= omega[0]) return {0, 0, 1.0f};
  if (falloff < omega[levels - 1]) return {levels - 1, levels - 1, 1.0f};
  for (int l = 1; l < levels; ++l) {
    if (falloff >= omega[l] && falloff < omega[l - 1]) {
      double t_sharp = transfer(l - 1, falloff, p);
      double t_blur = transfer(l, falloff, p);
      double denom = t_sharp - t_blur;
      double w = denom > 0.0 ? (0.5 - t_blur) / denom : 0.0;
      w = std::clamp(w, 0.0, 1.0);
      return {l - 1, l, static_cast<float>(w)};
    }
  }
  return {levels - 1, levels - 1, 1.0f};
}

}  // namespace

void FoveationParams::validate() const {
  if (pyramid_levels < 2)
    throw ConfigError("pyramid_levels must be >= 2, got " +
                      std::to_string(pyramid_levels));
  if (sigma_base <= 0.0 || k <= 0.0 || alpha <= 0.0)
    throw ConfigError("foveation constants must be positive");
}

double FoveationParams::resolved_p_scale(int image_width) const {
  return p_scale > 0.0 ? p_scale : image_width / 2.0;
}

std::vector<ImageBuffer> build_pyramid(const ImageBuffer& image, int levels) {
  if (levels < 2) throw ConfigError("pyramid needs at least 2 levels");
  image.validate_shape();
  const int min_dim = 1 << (levels - 1);
  if (image.width < min_dim || image.height < min_dim)
    throw DimensionError("image " + std::to_string(image.width) + "x" +
                         std::to_string(image.height) + " too small for " +
                         std::to_string(levels) + " pyramid levels (needs >= " +
                         std::to_string(min_dim) + ")");

  std::vector<ImageBuffer> pyramid;
  pyramid.reserve(levels);
  pyramid.push_back(image);

  std::vector<ImageBuffer> small;   // image downsampled i times
  std::vector<std::pair<int, int>> sizes;
  small.push_back(image);
  sizes.emplace_back(image.width, image.height);
  for (int i = 1; i < levels; ++i) {
    small.push_back(decimate2(gauss5(small.back())));
    sizes.emplace_back(small.back().width, small.back().height);
    ImageBuffer up = small.back();
    for (int j = i - 1; j >= 0; --j)
      up = upsample2(up, sizes[j].first, sizes[j].second);
    pyramid.push_back(std::move(up));
  }
  return pyramid;
}

std::vector<double> level_cutoffs(const FoveationParams& params) {
  params.validate();
  std::vector<double> omega(params.pyramid_levels);
  double base = std::sqrt(std::log(2.0) / params.k) * params.sigma_base;
  for (int i = 0; i < params.pyramid_levels; ++i)
    omega[i] = std::min(1.0, base * std::ldexp(1.0, 3 - i));
  return omega;
}

double foveal_radius(int image_width, const FoveationParams& params) {
  std::vector<double> omega = level_cutoffs(params);
  double p = params.resolved_p_scale(image_width);
  if (omega[0] >= 1.0) return 0.0;
  // R(e) >= omega_0  <=>  e <= p * alpha * (1/omega_0 - 1)
  return p * params.alpha * (1.0 / omega[0] - 1.0);
}

BlendMap compute_blend(int width, int height, FixationPoint fixation,
                       const FoveationParams& params) {
  params.validate();
  if (fixation.x < 0 || fixation.x >= width || fixation.y < 0 ||
      fixation.y >= height)
    throw BoundsError("fixation (" + std::to_string(fixation.x) + "," +
                      std::to_string(fixation.y) + ") outside image");
  const std::vector<double> omega = level_cutoffs(params);
  const double p_scale = params.resolved_p_scale(width);
  BlendMap map;
  map.width = width;
  map.height = height;
  map.levels = params.pyramid_levels;
  map.weights.assign(static_cast<size_t>(params.pyramid_levels) * width * height,
                     0.0f);
  const size_t plane = static_cast<size_t>(width) * height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double dx = x - fixation.x, dy = y - fixation.y;
      PixelBlend b =
          blend_at(std::sqrt(dx * dx + dy * dy), p_scale, params, omega);
      size_t at = static_cast<size_t>(y) * width + x;
      if (b.sharp_level == b.blur_level) {
        map.weights[plane * b.sharp_level + at] = 1.0f;
      } else {
        map.weights[plane * b.sharp_level + at] = b.sharp_weight;
        map.weights[plane * b.blur_level + at] = 1.0f - b.sharp_weight;
      }
    }
  }
  return map;
}

ImageBuffer foveate_with_pyramid(const std::vector<ImageBuffer>& pyramid,
                                 FixationPoint fixation,
                                 const FoveationParams& params) {
  params.validate();
  if (pyramid.size() != static_cast<size_t>(params.pyramid_levels))
    throw ShapeError("pyramid level count does not match params");
  const ImageBuffer& base = pyramid.front();
  if (fixation.x < 0 || fixation.x >= base.width || fixation.y < 0 ||
      fixation.y >= base.height)
    throw BoundsError("fixation (" + std::to_string(fixation.x) + "," +
                      std::to_string(fixation.y) + ") outside image");

  const std::vector<double> omega = level_cutoffs(params);
  const double p_scale = params.resolved_p_scale(base.width);
  ImageBuffer out(base.width, base.height, base.channels);
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      double dx = x - fixation.x, dy = y - fixation.y;
      PixelBlend b =
          blend_at(std::sqrt(dx * dx + dy * dy), p_scale, params, omega);
      for (int c = 0; c < base.channels; ++c) {
        if (b.sharp_level == b.blur_level) {
          out.at(x, y, c) = pyramid[b.sharp_level].at(x, y, c);
        } else {
          // lerp form keeps blends of equal inputs bit-exact
          float vs = pyramid[b.sharp_level].at(x, y, c);
          float vb = pyramid[b.blur_level].at(x, y, c);
          out.at(x, y, c) = vb + b.sharp_weight * (vs - vb);
        }
      }
    }
  }
  return out;
}

ImageBuffer foveate(const ImageBuffer& image, FixationPoint fixation,
                    const FoveationParams& params) {
  return foveate_with_pyramid(build_pyramid(image, params.pyramid_levels),
                              fixation, params);
}

}  // namespace fsum

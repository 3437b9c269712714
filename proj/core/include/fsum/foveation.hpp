#pragma once

#include <vector>

#include "fsum/image.hpp"

namespace fsum {

// Resolution falloff is modeled in pixel units: eccentricity e is the
// Euclidean distance to the fixation point, normalized by p_scale.
// R(e) = alpha / (e / p_scale + alpha) decays from 1 at fixation toward 0.
struct FoveationParams {
  int pyramid_levels = 6;
  double sigma_base = 0.248;
  double k = 3.0;
  double alpha = 2.5;
  // <= 0 means "half the image width", resolved at call time.
  double p_scale = 0.0;

  void validate() const;
  double resolved_p_scale(int image_width) const;
};

// Progressively low-passed copies of the input, all at the input's
// dimensions. Level 0 is the input itself; level i is the image downsampled
// i times (Gaussian smooth + decimate) and upsampled back.
// Throws DimensionError when either dimension is below 2^(levels-1).
std::vector<ImageBuffer> build_pyramid(const ImageBuffer& image, int levels);

// Per-pixel convex blend weights over pyramid levels. Pixels whose falloff
// R(e) reaches the level-0 cutoff get weight 1 on level 0; elsewhere the two
// levels bracketing the pixel's cutoff are mixed.
struct BlendMap {
  int width = 0;
  int height = 0;
  int levels = 0;
  // levels planes of width*height weights each.
  std::vector<float> weights;

  float weight(int x, int y, int level) const {
    return weights[static_cast<size_t>(level) * width * height +
                   static_cast<size_t>(y) * width + x];
  }
};

BlendMap compute_blend(int width, int height, FixationPoint fixation,
                       const FoveationParams& params);

// Radius (in pixels) of the full-resolution disk around fixation.
double foveal_radius(int image_width, const FoveationParams& params);

// Per-level falloff cutoffs omega_i; a pixel with R >= omega_0 sees level 0.
std::vector<double> level_cutoffs(const FoveationParams& params);

ImageBuffer foveate(const ImageBuffer& image, FixationPoint fixation,
                    const FoveationParams& params = {});

// Variant reusing a prebuilt pyramid; the pyramid may be shared read-only
// across fixation jobs.
ImageBuffer foveate_with_pyramid(const std::vector<ImageBuffer>& pyramid,
                                 FixationPoint fixation,
                                 const FoveationParams& params);

}  // namespace fsum

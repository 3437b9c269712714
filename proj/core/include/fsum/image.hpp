#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fsum {

// Row-major interleaved float image with intensities in [0,1].
// Grayscale (1 channel) or RGB (3 channels).
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> pixels;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        pixels(static_cast<size_t>(w) * h * c, fill) {}

  static ImageBuffer constant(int w, int h, int c, float value) {
    return ImageBuffer(w, h, c, value);
  }

  size_t index(int x, int y, int c = 0) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }
  float at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }
  float& at(int x, int y, int c = 0) { return pixels[index(x, y, c)]; }

  bool empty() const { return pixels.empty(); }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }

  // Enforces the full domain invariant: dimensions at least 32x32, 1 or 3
  // channels, every intensity finite and in [0,1]. Throws DimensionError /
  // DataError.
  void validate() const;

  // Structural checks only (consistent buffer size, positive dims); used by
  // operations that accept small synthetic inputs.
  void validate_shape() const;
};

// Sub-pixel fixation location in pixel coordinates (grid cell centers are
// generally fractional).
struct FixationPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const FixationPoint&) const = default;
};

// Rec.601 luma for RGB input; identity copy for grayscale.
ImageBuffer to_gray(const ImageBuffer& image);

// Central-difference gradient magnitude of the grayscale view, replicated at
// the borders. One value per pixel.
std::vector<float> gradient_magnitude(const ImageBuffer& image);

// Sum of squared gradient magnitudes over pixels whose center lies within
// [r_inner, r_outer) of (cx, cy), divided by the pixel count of that region.
double annulus_gradient_energy(const ImageBuffer& image, double cx, double cy,
                               double r_inner, double r_outer);

// SHA-256 hex digest over dimensions and raw pixel bytes; stable across runs.
std::string image_content_hash(const ImageBuffer& image);

}  // namespace fsum

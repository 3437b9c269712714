#include "fsum/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fsum/errors.hpp"
#include "fsum/hash.hpp"

namespace fsum {

void ImageBuffer::validate_shape() const {
  if (width <= 0 || height <= 0)
    throw DimensionError("image has non-positive dimensions");
  if (channels != 1 && channels != 3)
    throw DataError("image must have 1 or 3 channels, got " +
                    std::to_string(channels));
  if (pixels.size() != static_cast<size_t>(width) * height * channels)
    throw ShapeError("pixel buffer size does not match dimensions");
}

void ImageBuffer::validate() const {
  validate_shape();
  if (width < 32 || height < 32)
    throw DimensionError("image must be at least 32x32, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  for (float v : pixels) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
      throw DataError("image intensity out of [0,1] or not finite");
  }
}

ImageBuffer to_gray(const ImageBuffer& image) {
  image.validate_shape();
  if (image.channels == 1) return image;
  ImageBuffer gray(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      gray.at(x, y) = 0.299f * image.at(x, y, 0) + 0.587f * image.at(x, y, 1) +
                      0.114f * image.at(x, y, 2);
    }
  }
  return gray;
}

std::vector<float> gradient_magnitude(const ImageBuffer& image) {
  ImageBuffer gray = to_gray(image);
  const int w = gray.width, h = gray.height;
  std::vector<float> mag(static_cast<size_t>(w) * h, 0.0f);
  auto clampx = [w](int x) { return std::clamp(x, 0, w - 1); };
  auto clampy = [h](int y) { return std::clamp(y, 0, h - 1); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float gx = 0.5f * (gray.at(clampx(x + 1), y) - gray.at(clampx(x - 1), y));
      float gy = 0.5f * (gray.at(x, clampy(y + 1)) - gray.at(x, clampy(y - 1)));
      mag[static_cast<size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return mag;
}

double annulus_gradient_energy(const ImageBuffer& image, double cx, double cy,
                               double r_inner, double r_outer) {
  std::vector<float> mag = gradient_magnitude(image);
  const int w = image.width, h = image.height;
  double energy = 0.0;
  long count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx = x - cx, dy = y - cy;
      double d = std::sqrt(dx * dx + dy * dy);
      if (d >= r_inner && d < r_outer) {
        double m = mag[static_cast<size_t>(y) * w + x];
        energy += m * m;
        ++count;
      }
    }
  }
  if (count == 0) return 0.0;
  return energy / static_cast<double>(count);
}

std::string image_content_hash(const ImageBuffer& image) {
  std::ostringstream header;
  header << image.width << "x" << image.height << "x" << image.channels << "|";
  std::string bytes = header.str();
  size_t off = bytes.size();
  bytes.resize(off + image.pixels.size() * sizeof(float));
  std::memcpy(bytes.data() + off, image.pixels.data(),
              image.pixels.size() * sizeof(float));
  return sha256_hex(bytes.data(), bytes.size());
}

}  // namespace fsum

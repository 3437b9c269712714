#include "fsum/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fsum/errors.hpp"

namespace fsum {
namespace {

// Matplotlib's viridis at 10 evenly spaced stops.
constexpr float kViridis[10][3] = {
    {0.2670f, 0.0049f, 0.3294f}, {0.2823f, 0.1566f, 0.4706f},
    {0.2446f, 0.2869f, 0.5377f}, {0.1906f, 0.4071f, 0.5561f},
    {0.1479f, 0.5110f, 0.5573f}, {0.1277f, 0.5665f, 0.5507f},
    {0.2080f, 0.7187f, 0.4729f}, {0.4311f, 0.8068f, 0.3458f},
    {0.7098f, 0.8688f, 0.1693f}, {0.9932f, 0.9062f, 0.1439f}};

struct Glyph {
  char ch;
  unsigned char rows[7];  // 5-bit rows, 0x10 = leftmost column
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
};

const Glyph* find_glyph(char ch) {
  for (const Glyph& g : kFont) {
    if (g.ch == ch) return &g;
  }
  return nullptr;
}

std::string format_label(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", value);
  return buf;
}

void set_pixel(ImageBuffer& canvas, int x, int y, const float rgb[3]) {
  if (x < 0 || x >= canvas.width || y < 0 || y >= canvas.height) return;
  for (int c = 0; c < canvas.channels; ++c) {
    canvas.pixels[canvas.index(x, y, c)] = rgb[std::min(c, 2)];
  }
}

}  // namespace

Matrix bilinear_upsample(const Matrix& map, int out_width, int out_height) {
  if (map.empty()) throw ShapeError("bilinear_upsample: empty map");
  if (out_width < 1 || out_height < 1) {
    throw ShapeError("bilinear_upsample: non-positive output size");
  }
  Matrix out(out_height, out_width);
  for (int y = 0; y < out_height; ++y) {
    // Cell m's center sits at pixel row (m + 0.5) * out_height / rows - 0.5.
    double gy = (y + 0.5) * static_cast<double>(map.rows) / out_height - 0.5;
    gy = std::clamp(gy, 0.0, static_cast<double>(map.rows - 1));
    const int m0 = static_cast<int>(gy);
    const int m1 = std::min(m0 + 1, map.rows - 1);
    const double fy = gy - m0;
    for (int x = 0; x < out_width; ++x) {
      double gx = (x + 0.5) * static_cast<double>(map.cols) / out_width - 0.5;
      gx = std::clamp(gx, 0.0, static_cast<double>(map.cols - 1));
      const int n0 = static_cast<int>(gx);
      const int n1 = std::min(n0 + 1, map.cols - 1);
      const double fx = gx - n0;
      const double top = map.at(m0, n0) + fx * (map.at(m0, n1) - map.at(m0, n0));
      const double bottom = map.at(m1, n0) + fx * (map.at(m1, n1) - map.at(m1, n0));
      out.at(y, x) = top + fy * (bottom - top);
    }
  }
  return out;
}

void ramp_color(const std::string& colormap, double t, float rgb[3]) {
  const double tc = std::clamp(t, 0.0, 1.0);
  if (colormap == "gray") {
    rgb[0] = rgb[1] = rgb[2] = static_cast<float>(tc);
    return;
  }
  if (colormap != "viridis") {
    throw ConfigError("ramp_color: unknown colormap '" + colormap + "'");
  }
  const double pos = tc * 9.0;
  const int i0 = std::min(8, static_cast<int>(pos));
  const double f = pos - i0;
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<float>(kViridis[i0][c] +
                                f * (kViridis[i0 + 1][c] - kViridis[i0][c]));
  }
}

void draw_text(ImageBuffer& canvas, int x, int y, const std::string& text,
               const float rgb[3]) {
  int cx = x;
  for (char ch : text) {
    const Glyph* glyph = find_glyph(ch);
    if (glyph) {
      for (int row = 0; row < 7; ++row) {
        for (int col = 0; col < 5; ++col) {
          if (glyph->rows[row] & (0x10 >> col)) {
            set_pixel(canvas, cx + col, y + row, rgb);
          }
        }
      }
    }
    cx += 6;  // 5-pixel glyph + 1-pixel gap; unknown glyphs advance as spaces
  }
}

ImageBuffer render_heatmap(const FSumMap& map, const ImageBuffer& image,
                           const std::string& image_id, const RenderOptions& options) {
  image.validate_shape();
  if (options.mode == RenderMode::Overlay && map.image_id != image_id) {
    throw AlignmentError("render: map belongs to '" + map.image_id +
                         "' but the image is '" + image_id + "'");
  }
  if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) {
    throw ConfigError("render: alpha outside [0,1]");
  }
  const bool use_normalized = options.prefer_normalized && !map.normalized.empty();
  const Matrix& plane = use_normalized ? map.normalized : map.raw;
  if (plane.empty()) throw ShapeError("render: map has no values");

  const auto [lo_it, hi_it] =
      std::minmax_element(plane.values.begin(), plane.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double span = hi - lo;

  const Matrix up = bilinear_upsample(plane, image.width, image.height);

  const int bar_gap = 8;
  const int bar_width = 16;
  const int label_gap = 4;
  const int label_width = 9 * 6;   // up to nine 5x7 glyphs
  const int extra = options.colorbar
                        ? bar_gap + bar_width + label_gap + label_width + label_gap
                        : 0;

  ImageBuffer out = ImageBuffer::constant(image.width + extra, image.height, 3, 0.0f);

  float rgb[3];
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      // Constant maps display as the mid-ramp color.
      const double t = span > 0.0 ? (up.at(y, x) - lo) / span : 0.5;
      ramp_color(options.colormap, t, rgb);
      for (int c = 0; c < 3; ++c) {
        float v = rgb[c];
        if (options.mode == RenderMode::Overlay) {
          const float base =
              image.pixels[image.index(x, y, std::min(c, image.channels - 1))];
          v = static_cast<float>((1.0 - options.alpha) * base + options.alpha * v);
        }
        out.pixels[out.index(x, y, c)] = v;
      }
    }
  }

  if (options.colorbar) {
    const int bar_x0 = image.width + bar_gap;
    const int bar_y0 = 4;
    const int bar_y1 = std::max(bar_y0 + 2, image.height - 4);
    for (int y = bar_y0; y < bar_y1; ++y) {
      // Top of the bar is the displayed maximum.
      const double t =
          1.0 - static_cast<double>(y - bar_y0) / static_cast<double>(bar_y1 - 1 - bar_y0);
      ramp_color(options.colormap, t, rgb);
      for (int x = bar_x0; x < bar_x0 + bar_width; ++x) {
        for (int c = 0; c < 3; ++c) out.pixels[out.index(x, y, c)] = rgb[c];
      }
    }
    const float white[3] = {1.0f, 1.0f, 1.0f};
    const int text_x = bar_x0 + bar_width + label_gap;
    draw_text(out, text_x, bar_y0, format_label(hi), white);
    draw_text(out, text_x, bar_y1 - 7, format_label(lo), white);
  }
  return out;
}

}  // namespace fsum

#pragma once

#include <string>

#include "fsum/fsum_map.hpp"
#include "fsum/image.hpp"
#include "fsum/matrix.hpp"

namespace fsum {

enum class RenderMode { Standalone, Overlay };

struct RenderOptions {
  RenderMode mode = RenderMode::Overlay;
  std::string colormap = "viridis";  // viridis | gray
  double alpha = 0.5;                // heat weight in overlay mode
  bool prefer_normalized = true;     // render the normalized plane when present
  bool colorbar = true;
};

// Renders the map at the image's resolution: bilinear upsampling with cell
// centers anchored to their pixel centers, values mapped through the
// colormap, optional 0.5-alpha blend over the photograph, plus a colorbar
// strip labeled with the displayed min/max.  Overlay mode requires
// map.image_id == image_id (AlignmentError otherwise).
ImageBuffer render_heatmap(const FSumMap& map, const ImageBuffer& image,
                           const std::string& image_id,
                           const RenderOptions& options = {});

// Building blocks (unit-tested directly):

// Upsamples treating map cells as samples at cell centers of a uniform
// partition of the output; edges clamp.
Matrix bilinear_upsample(const Matrix& map, int out_width, int out_height);

// t in [0,1] -> RGB in [0,1] through the named ramp.
void ramp_color(const std::string& colormap, double t, float rgb[3]);

// Draws 5x7 bitmap text (digits, '.', '-', '+', 'e') with its top-left at
// (x, y); pixels outside the canvas are clipped.
void draw_text(ImageBuffer& canvas, int x, int y, const std::string& text,
               const float rgb[3]);

}  // namespace fsum

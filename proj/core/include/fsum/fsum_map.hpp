#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsum/backends.hpp"
#include "fsum/foveation.hpp"
#include "fsum/image.hpp"
#include "fsum/matrix.hpp"
#include "fsum/version.hpp"

namespace fsum {

// Uniform fixation grid: rows x cols points at cell centers, 108-136 total.
struct FixationGrid {
  int rows = 0;
  int cols = 0;
  std::vector<FixationPoint> points;  // rows * cols, row-major (m, n)
  double pitch_x = 0.0;               // cell width in pixels
  double pitch_y = 0.0;               // cell height in pixels

  int count() const { return rows * cols; }
  const FixationPoint& point(int m, int n) const {
    return points[static_cast<std::size_t>(m) * cols + n];
  }
};

// Places the fixation grid for an image of the given size.  The grid targets
// 120 points (center of the 108-136 band): rows = round(sqrt(120/aspect)),
// cols = round(rows*aspect), nudged by the smallest row/col adjustment that
// brings rows*cols into [108, 136].  Points sit at cell centers, strictly
// inside the image.
FixationGrid make_grid(int width, int height);

// Global min-max statistics used to map raw similarities into [0,1].
struct NormalizationStats {
  double global_min = 0.0;
  double global_max = 0.0;
  std::string source;   // dataset identifier the stats were pooled over
  long long n_values = 0;

  void validate() const;  // min <= max, n_values >= 1
};

void save_stats_json(const NormalizationStats& stats, const std::filesystem::path& path,
                     const Provenance* provenance = nullptr);
NormalizationStats load_stats_json(const std::filesystem::path& path);

// One image's F-SUM: raw mean-pairwise-cosine per fixation cell, plus the
// dataset-normalized copy once stats are available.
struct FSumMap {
  std::string image_id;
  int n_samples = 0;      // N of the mean-pairwise similarity (captions per set)
  Matrix raw;             // values in [-1, 1]
  Matrix normalized;      // values in [0, 1]; empty until normalization runs
  std::string stats_ref;  // identifier of the NormalizationStats applied
};

void save_fsum_json(const FSumMap& map, const std::filesystem::path& path,
                    const Provenance* provenance = nullptr);
FSumMap load_fsum_json(const std::filesystem::path& path);

// Mean over all N^2 ordered (gold, foveated) cosine pairs, per cell.
// `cells` is rows*cols row-major; every cell must hold exactly gold.size()
// embeddings.  Throws ShapeError on ragged counts and DegenerateInputError
// (naming the cell) on zero-norm embeddings.
Matrix build_raw_map(const std::vector<EmbeddingVector>& gold,
                     const std::vector<std::vector<EmbeddingVector>>& cells, int rows,
                     int cols);

// Pooled min-max normalization across every cell of every map.  Throws
// DegenerateInputError if all pooled values are equal (callers wanting the
// all-cells-0.5 fallback use apply_normalization with allow_degenerate).
std::pair<std::vector<Matrix>, NormalizationStats> normalize_maps(
    const std::vector<Matrix>& raws, const std::string& source);

// Normalizes one raw map with previously pooled stats.  When the stats span
// is zero: throws DegenerateInputError unless allow_degenerate, which yields
// all cells = 0.5.  Results are clamped to [0,1] so maps scored with stats
// from a different pool stay in range.
Matrix apply_normalization(const Matrix& raw, const NormalizationStats& stats,
                           bool allow_degenerate = false);

struct BuildOptions {
  std::string image_id;
  int n_samples = 5;
  std::string prompt{kDescribePrompt};
  double temperature = 1.0;
  FoveationParams foveation{};
  int workers = 1;
  int embed_batch = 256;  // max texts per embedding call
};

// Full map construction for one image: gold captions on the unfoveated
// image, per-fixation foveation + captioning (parallel over fixations),
// batched embedding, mean-pairwise-cosine reduction, and normalization when `stats` is
// given.  Deterministic for deterministic backends regardless of workers.
FSumMap build_fsum(const ImageBuffer& image, CaptionBackend& captions,
                   EmbeddingBackend& embeddings, const BuildOptions& options,
                   const NormalizationStats* stats = nullptr);

}  // namespace fsum

#include "fsum/fsum_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fsum/errors.hpp"
#include "fsum/hash.hpp"
#include "fsum/thread_pool.hpp"

namespace fsum {
namespace {

using nlohmann::json;

constexpr int kMinPoints = 108;
constexpr int kMaxPoints = 136;
constexpr double kTargetPoints = 120.0;

bool in_band(int rows, int cols) {
  const int n = rows * cols;
  return n >= kMinPoints && n <= kMaxPoints;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DataError("map JSON: expected non-empty array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.at(0).size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j.at(r);
    if (static_cast<int>(row.size()) != cols) {
      throw ShapeError("map JSON: ragged rows");
    }
    for (int c = 0; c < cols; ++c) m.at(r, c) = row.at(c).get<double>();
  }
  return m;
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw DataError("short write to " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

FixationGrid make_grid(int width, int height) {
  if (width < 32 || height < 32) {
    throw DimensionError("make_grid: image must be at least 32x32, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
  const double aspect = static_cast<double>(width) / static_cast<double>(height);
  int rows = std::max(1, static_cast<int>(std::lround(std::sqrt(kTargetPoints / aspect))));
  int cols = std::max(1, static_cast<int>(std::lround(rows * aspect)));

  if (!in_band(rows, cols)) {
    // Smallest adjustment first: total |dr|+|dc| ascending; within a total,
    // row changes before column changes; grow before shrink when under the
    // band, shrink before grow when over.
    const bool grow = rows * cols < kMinPoints;
    bool found = false;
    for (int total = 1; total <= 1024 && !found; ++total) {
      for (int dc_abs = 0; dc_abs <= total && !found; ++dc_abs) {
        const int dr_abs = total - dc_abs;
        const int sign_order[2] = {grow ? 1 : -1, grow ? -1 : 1};
        for (int sr : sign_order) {
          for (int sc : sign_order) {
            const int r = rows + sr * dr_abs;
            const int c = cols + sc * dc_abs;
            if (r < 1 || c < 1) continue;
            if (in_band(r, c)) {
              rows = r;
              cols = c;
              found = true;
              break;
            }
          }
          if (found || dr_abs == 0) break;  // dr_abs == 0: sign of dr is moot
        }
      }
    }
    if (!found) {
      throw DimensionError("make_grid: no grid in [108,136] reachable for " +
                           std::to_string(width) + "x" + std::to_string(height));
    }
  }

  FixationGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.pitch_x = static_cast<double>(width) / cols;
  grid.pitch_y = static_cast<double>(height) / rows;
  grid.points.reserve(static_cast<std::size_t>(rows) * cols);
  for (int m = 0; m < rows; ++m) {
    for (int n = 0; n < cols; ++n) {
      grid.points.push_back(FixationPoint{(n + 0.5) * grid.pitch_x,
                                          (m + 0.5) * grid.pitch_y});
    }
  }
  return grid;
}

void NormalizationStats::validate() const {
  if (!(global_min <= global_max)) {
    throw DataError("NormalizationStats: min > max");
  }
  if (n_values < 1) throw DataError("NormalizationStats: n_values < 1");
}

void save_stats_json(const NormalizationStats& stats, const std::filesystem::path& path,
                     const Provenance* provenance) {
  stats.validate();
  json j;
  j["global_min"] = stats.global_min;
  j["global_max"] = stats.global_max;
  j["source"] = stats.source;
  j["n_values"] = stats.n_values;
  if (provenance) {
    j["config_hash"] = provenance->config_hash;
    j["version"] = provenance->version;
  }
  write_json_file(j, path);
}

NormalizationStats load_stats_json(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  NormalizationStats stats;
  try {
    stats.global_min = j.at("global_min").get<double>();
    stats.global_max = j.at("global_max").get<double>();
    stats.source = j.at("source").get<std::string>();
    stats.n_values = j.at("n_values").get<long long>();
  } catch (const json::exception& e) {
    throw DataError("stats JSON " + path.string() + ": " + e.what());
  }
  stats.validate();
  return stats;
}

void save_fsum_json(const FSumMap& map, const std::filesystem::path& path,
                    const Provenance* provenance) {
  json j;
  j["image_id"] = map.image_id;
  j["rows"] = map.raw.rows;
  j["cols"] = map.raw.cols;
  j["n_samples"] = map.n_samples;
  j["raw"] = matrix_to_json(map.raw);
  if (!map.normalized.empty()) {
    j["normalized"] = matrix_to_json(map.normalized);
  } else {
    j["normalized"] = nullptr;
  }
  j["stats_ref"] = map.stats_ref;
  if (provenance) {
    j["config_hash"] = provenance->config_hash;
    j["version"] = provenance->version;
  }
  write_json_file(j, path);
}

FSumMap load_fsum_json(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  FSumMap map;
  try {
    map.image_id = j.at("image_id").get<std::string>();
    map.n_samples = j.at("n_samples").get<int>();
    map.raw = matrix_from_json(j.at("raw"));
    if (j.contains("normalized") && !j["normalized"].is_null()) {
      map.normalized = matrix_from_json(j["normalized"]);
      if (!map.normalized.same_shape(map.raw)) {
        throw ShapeError("map JSON: normalized shape differs from raw");
      }
    }
    map.stats_ref = j.value("stats_ref", std::string());
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    if (rows != map.raw.rows || cols != map.raw.cols) {
      throw ShapeError("map JSON: declared shape differs from raw payload");
    }
  } catch (const json::exception& e) {
    throw DataError("map JSON " + path.string() + ": " + e.what());
  }
  return map;
}

Matrix build_raw_map(const std::vector<EmbeddingVector>& gold,
                     const std::vector<std::vector<EmbeddingVector>>& cells, int rows,
                     int cols) {
  if (gold.empty()) throw ShapeError("build_raw_map: empty gold set");
  if (rows <= 0 || cols <= 0 ||
      cells.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("build_raw_map: cells size does not match rows x cols");
  }
  const std::size_t n = gold.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (gold[i].norm() == 0.0) {
      throw DegenerateInputError("build_raw_map: zero-norm gold embedding " +
                                 std::to_string(i));
    }
  }

  Matrix raw(rows, cols);
  for (int m = 0; m < rows; ++m) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t idx = static_cast<std::size_t>(m) * cols + c;
      const std::vector<EmbeddingVector>& cell = cells[idx];
      if (cell.size() != n) {
        throw ShapeError("build_raw_map: cell (" + std::to_string(m) + "," +
                         std::to_string(c) + ") has " + std::to_string(cell.size()) +
                         " embeddings, expected " + std::to_string(n));
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (cell[j].norm() == 0.0) {
          throw DegenerateInputError("build_raw_map: zero-norm embedding at cell (" +
                                     std::to_string(m) + "," + std::to_string(c) +
                                     ") sample " + std::to_string(j));
        }
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          sum += cosine(gold[i], cell[j]);
        }
      }
      raw.at(m, c) = sum / static_cast<double>(n * n);
    }
  }
  return raw;
}

std::pair<std::vector<Matrix>, NormalizationStats> normalize_maps(
    const std::vector<Matrix>& raws, const std::string& source) {
  if (raws.empty()) throw ShapeError("normalize_maps: no maps");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  long long n_values = 0;
  for (const Matrix& m : raws) {
    if (m.empty()) throw ShapeError("normalize_maps: empty map");
    for (double v : m.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    n_values += static_cast<long long>(m.size());
  }
  if (!(hi > lo)) {
    throw DegenerateInputError(
        "normalize_maps: all pooled map values are equal (" + std::to_string(lo) +
        "); opt into the 0.5 fallback via apply_normalization if intended");
  }

  NormalizationStats stats;
  stats.global_min = lo;
  stats.global_max = hi;
  stats.source = source;
  stats.n_values = n_values;

  std::vector<Matrix> normalized;
  normalized.reserve(raws.size());
  for (const Matrix& m : raws) {
    normalized.push_back(apply_normalization(m, stats, false));
  }
  return {std::move(normalized), stats};
}

Matrix apply_normalization(const Matrix& raw, const NormalizationStats& stats,
                           bool allow_degenerate) {
  stats.validate();
  if (raw.empty()) throw ShapeError("apply_normalization: empty map");
  const double span = stats.global_max - stats.global_min;
  Matrix out(raw.rows, raw.cols);
  if (span <= 0.0) {
    if (!allow_degenerate) {
      throw DegenerateInputError(
          "apply_normalization: degenerate stats (min == max)");
    }
    std::fill(out.values.begin(), out.values.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const double v = (raw.values[i] - stats.global_min) / span;
    out.values[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

FSumMap build_fsum(const ImageBuffer& image, CaptionBackend& captions,
                   EmbeddingBackend& embeddings, const BuildOptions& options,
                   const NormalizationStats* stats) {
  image.validate();
  if (options.n_samples < 1) throw ConfigError("build_fsum: n_samples < 1");
  if (options.embed_batch < 1) throw ConfigError("build_fsum: embed_batch < 1");
  options.foveation.validate();

  const FixationGrid grid = make_grid(image.width, image.height);
  const std::size_t n_cells = static_cast<std::size_t>(grid.count());
  const std::size_t n = static_cast<std::size_t>(options.n_samples);

  // Gold: captions of the unfoveated image.
  const DescriptionSet gold_set =
      captions.describe(image, options.prompt, options.n_samples, options.temperature);

  // One pyramid per image, shared across fixations (read-only).
  const std::vector<ImageBuffer> pyramid =
      build_pyramid(image, options.foveation.pyramid_levels);

  std::vector<std::vector<std::string>> cell_texts(n_cells);
  parallel_for(n_cells, options.workers, [&](std::size_t idx) {
    const int m = static_cast<int>(idx) / grid.cols;
    const int c = static_cast<int>(idx) % grid.cols;
    try {
      const ImageBuffer fov =
          foveate_with_pyramid(pyramid, grid.points[idx], options.foveation);
      const DescriptionSet set =
          captions.describe(fov, options.prompt, options.n_samples, options.temperature);
      cell_texts[idx].reserve(n);
      for (const CaptionSample& s : set.samples) cell_texts[idx].push_back(s.text);
    } catch (const Error& e) {
      throw Error(e.kind(), "fixation (" + std::to_string(m) + "," +
                                std::to_string(c) + "): " + e.what());
    }
  });

  // Batched embedding: gold first, then cells row-major.
  std::vector<std::string> all_texts;
  all_texts.reserve(n * (n_cells + 1));
  for (const CaptionSample& s : gold_set.samples) all_texts.push_back(s.text);
  for (const std::vector<std::string>& texts : cell_texts) {
    for (const std::string& t : texts) all_texts.push_back(t);
  }

  std::vector<EmbeddingVector> all_vectors;
  all_vectors.reserve(all_texts.size());
  for (std::size_t start = 0; start < all_texts.size();
       start += static_cast<std::size_t>(options.embed_batch)) {
    const std::size_t stop =
        std::min(all_texts.size(), start + static_cast<std::size_t>(options.embed_batch));
    const std::vector<std::string> batch(all_texts.begin() + start,
                                         all_texts.begin() + stop);
    std::vector<EmbeddingVector> vecs = embeddings.embed(batch);
    if (vecs.size() != batch.size()) {
      throw MalformedResponseError("build_fsum: embedding count mismatch", "");
    }
    for (EmbeddingVector& v : vecs) all_vectors.push_back(std::move(v));
  }
  const int dim = all_vectors.front().dim();
  for (const EmbeddingVector& v : all_vectors) {
    if (v.dim() != dim) {
      throw ConfigError("build_fsum: embedding dimension changed within one run");
    }
  }

  std::vector<EmbeddingVector> gold(all_vectors.begin(), all_vectors.begin() + n);
  std::vector<std::vector<EmbeddingVector>> cells(n_cells);
  std::size_t cursor = n;
  for (std::size_t idx = 0; idx < n_cells; ++idx) {
    cells[idx].assign(all_vectors.begin() + cursor, all_vectors.begin() + cursor + n);
    cursor += n;
  }

  FSumMap map;
  map.image_id = options.image_id.empty() ? image_content_hash(image).substr(0, 16)
                                          : options.image_id;
  map.n_samples = options.n_samples;
  map.raw = build_raw_map(gold, cells, grid.rows, grid.cols);
  if (stats) {
    map.normalized = apply_normalization(map.raw, *stats, false);
    map.stats_ref = stats->source;
  }
  return map;
}

}  // namespace fsum

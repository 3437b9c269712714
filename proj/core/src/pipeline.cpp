#include "fsum/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <utility>

#include <json.hpp>

#include "fsum/csv.hpp"
#include "fsum/fsum_map.hpp"
#include "fsum/hash.hpp"
#include "fsum/io.hpp"
#include "fsum/remote.hpp"
#include "fsum/render.hpp"
#include "fsum/scoring.hpp"
#include "fsum/version.hpp"

namespace fsum {
namespace {

using nlohmann::json;

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw DataError("short write to " + path.string());
}

}  // namespace

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return "config";
    case ErrorKind::Backend:
      return "backend";
    case ErrorKind::Data:
      return "data";
  }
  return "data";
}

BackendStack make_backends(const RunConfig& config,
                           std::shared_ptr<Transport> transport) {
  config.validate();
  auto cache = std::make_shared<DiskCache>(config.cache_dir);

  std::shared_ptr<CaptionBackend> captions;
  std::shared_ptr<EmbeddingBackend> embeddings;
  if (config.profile == "stub") {
    captions = std::make_shared<StubCaptionBackend>(config.stub_salt);
    embeddings = std::make_shared<StubEmbeddingBackend>(config.stub_embedding_dim);
  } else {
    std::shared_ptr<Transport> wire =
        transport ? std::move(transport)
                  : std::shared_ptr<Transport>(make_http_transport(config.remote.base_url));
    wire = std::make_shared<RetryingTransport>(std::move(wire));
    if (config.rate_limit_ms > 0.0) {
      const auto interval =
          std::chrono::milliseconds(static_cast<long long>(config.rate_limit_ms));
      wire = std::make_shared<RateLimitedTransport>(std::move(wire), interval);
    }
    captions = std::make_shared<RemoteCaptionBackend>(config.remote, wire);
    embeddings = std::make_shared<RemoteEmbeddingBackend>(config.remote, wire);
  }

  BackendStack stack;
  stack.cache = cache;
  stack.captions = std::make_shared<CachedCaptionBackend>(std::move(captions), cache);
  stack.embeddings =
      std::make_shared<CachedEmbeddingBackend>(std::move(embeddings), cache);
  return stack;
}

namespace {

struct MappedImage {
  std::string image_id;
  std::filesystem::path image_path;
  FSumMap map;  // raw until normalization, then normalized as well
};

void record_failure(std::vector<FailedImage>& failures, const std::string& image_id,
                    const std::string& phase, const Error& e) {
  failures.push_back({image_id, phase, error_kind_name(e.kind()), e.what()});
}

}  // namespace

PipelineResult run_pipeline(const Manifest& manifest,
                            const std::filesystem::path& manifest_path,
                            const RunConfig& config,
                            const std::filesystem::path& out_root,
                            const BackendStack& backends) {
  manifest.validate();
  config.validate();
  if (!backends.captions || !backends.embeddings) {
    throw ConfigError("run_pipeline: backend stack is incomplete");
  }

  const Provenance provenance{config_hash(config), kVersion};
  const BinMode bin_mode = parse_bin_mode(config.bin_mode);

  PipelineResult result;
  result.out_dir = out_root / manifest.dataset_id;
  result.n_total = static_cast<int>(manifest.entries.size());
  const auto maps_dir = result.out_dir / "maps";
  const auto scores_dir = result.out_dir / "scores";
  const auto renders_dir = result.out_dir / "renders";
  const auto reports_dir = result.out_dir / "reports";
  std::filesystem::create_directories(maps_dir);
  std::filesystem::create_directories(scores_dir);
  std::filesystem::create_directories(renders_dir);
  std::filesystem::create_directories(reports_dir);

  // Phase 1: load + map.  Images are processed one at a time (fixations fan
  // out over config.workers inside build_fsum); only the small per-cell maps
  // are kept in memory, never the decoded images.
  std::vector<MappedImage> mapped;
  mapped.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    const auto image_path = resolve_entry_path(manifest_path, entry);
    ImageBuffer image;
    try {
      image = load_image(image_path);
    } catch (const Error& e) {
      record_failure(result.failures, entry.image_id, "load", e);
      continue;
    }
    BuildOptions options;
    options.image_id = entry.image_id;
    options.n_samples = config.n_samples;
    options.temperature = config.effective_temperature();
    options.foveation = config.foveation;
    options.workers = config.workers;
    try {
      MappedImage item;
      item.image_id = entry.image_id;
      item.image_path = image_path;
      item.map = build_fsum(image, *backends.captions, *backends.embeddings, options);
      mapped.push_back(std::move(item));
    } catch (const Error& e) {
      record_failure(result.failures, entry.image_id, "map", e);
    }
  }

  // Phase 2: pooled normalization over every successfully mapped image.
  if (!mapped.empty()) {
    std::vector<Matrix> raws;
    raws.reserve(mapped.size());
    for (const MappedImage& item : mapped) raws.push_back(item.map.raw);
    NormalizationStats stats;
    try {
      auto [normalized, pooled] = normalize_maps(raws, manifest.dataset_id);
      stats = pooled;
      for (std::size_t i = 0; i < mapped.size(); ++i) {
        mapped[i].map.normalized = std::move(normalized[i]);
        mapped[i].map.stats_ref = manifest.dataset_id;
      }
    } catch (const DegenerateInputError&) {
      // Every pooled value equal: fall back to flat 0.5 maps so the run can
      // still complete end to end.
      stats.global_min = raws.front().values.front();
      stats.global_max = stats.global_min;
      stats.source = manifest.dataset_id;
      stats.n_values = 0;
      for (Matrix& m : raws) stats.n_values += static_cast<long long>(m.size());
      for (MappedImage& item : mapped) {
        item.map.normalized = apply_normalization(item.map.raw, stats, true);
        item.map.stats_ref = manifest.dataset_id;
      }
    }
    save_stats_json(stats, reports_dir / "normalization_stats.json", &provenance);
    for (const MappedImage& item : mapped) {
      save_fsum_json(item.map, maps_dir / (item.image_id + ".json"), &provenance);
    }
  }

  // Phase 3: score each normalized map, then dataset-level difficulty.
  std::vector<ScoreReport> reports;
  reports.reserve(mapped.size());
  std::vector<const MappedImage*> scored_images;
  for (const MappedImage& item : mapped) {
    try {
      ScoreOptions options;
      options.R = config.R;
      options.bin_mode = bin_mode;
      reports.push_back(score_map(item.map.normalized, item.image_id, options));
      scored_images.push_back(&item);
    } catch (const Error& e) {
      record_failure(result.failures, item.image_id, "score", e);
    }
  }
  if (!reports.empty()) {
    std::vector<double> s_raws;
    s_raws.reserve(reports.size());
    for (const ScoreReport& r : reports) s_raws.push_back(r.s_raw);
    NormalizationStats difficulty_stats;
    try {
      auto [difficulties, stats] = difficulty_from_scores(s_raws, manifest.dataset_id);
      difficulty_stats = stats;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        reports[i].difficulty = difficulties[i];
      }
    } catch (const DegenerateInputError&) {
      // One image, or all scores identical: difficulty is uninformative, 0.5.
      difficulty_stats.global_min = s_raws.front();
      difficulty_stats.global_max = s_raws.front();
      difficulty_stats.source = manifest.dataset_id;
      difficulty_stats.n_values = static_cast<long long>(s_raws.size());
      for (ScoreReport& r : reports) {
        r.difficulty = apply_difficulty(r.s_raw, difficulty_stats, true);
      }
    }
    save_stats_json(difficulty_stats, reports_dir / "difficulty_stats.json",
                    &provenance);

    json scores_json;
    scores_json["dataset_id"] = manifest.dataset_id;
    scores_json["R"] = config.R;
    scores_json["bin_mode"] = bin_mode_name(bin_mode);
    json rows = json::array();
    for (const ScoreReport& r : reports) {
      json row;
      row["image_id"] = r.image_id;
      row["k_values"] = r.k_values;
      row["s_raw"] = r.s_raw;
      row["difficulty"] = r.difficulty;
      row["n_cells"] = r.n_cells;
      rows.push_back(std::move(row));
    }
    scores_json["scores"] = std::move(rows);
    scores_json["config_hash"] = provenance.config_hash;
    scores_json["version"] = provenance.version;
    write_json_file(scores_json, scores_dir / "scores.json");

    std::vector<std::vector<std::string>> csv_rows;
    csv_rows.push_back({"# config_hash=" + provenance.config_hash +
                        " version=" + provenance.version});
    csv_rows.push_back({"image_id", "s_raw", "difficulty"});
    for (const ScoreReport& r : reports) {
      csv_rows.push_back(
          {r.image_id, format_double(r.s_raw), format_double(r.difficulty)});
    }
    write_csv(scores_dir / "scores.csv", csv_rows);

    std::vector<std::vector<std::string>> metric_rows;
    metric_rows.push_back({"# config_hash=" + provenance.config_hash +
                           " version=" + provenance.version});
    metric_rows.push_back({"image_id", "metric_name", "value"});
    for (const ScoreReport& r : reports) {
      metric_rows.push_back({r.image_id, "fsum", format_double(r.difficulty)});
    }
    write_csv(reports_dir / "metrics.csv", metric_rows);
  }

  // Phase 4: renders.  Images are reloaded here rather than kept resident.
  std::vector<std::string> rendered_ok;
  for (const MappedImage* item : scored_images) {
    try {
      const ImageBuffer image = load_image(item->image_path);
      RenderOptions options;
      options.mode = RenderMode::Overlay;
      options.colormap = config.colormap;
      const ImageBuffer heat =
          render_heatmap(item->map, image, item->image_id, options);
      save_png(heat, renders_dir / (item->image_id + ".png"));
      rendered_ok.push_back(item->image_id);
    } catch (const Error& e) {
      record_failure(result.failures, item->image_id, "render", e);
    }
  }

  // Ledger: always written, sorted so reruns are byte-identical.
  std::sort(result.failures.begin(), result.failures.end(),
            [](const FailedImage& a, const FailedImage& b) {
              return std::tie(a.image_id, a.phase) < std::tie(b.image_id, b.phase);
            });
  json errors_json;
  errors_json["config_hash"] = provenance.config_hash;
  errors_json["version"] = provenance.version;
  json error_rows = json::array();
  for (const FailedImage& f : result.failures) {
    json row;
    row["image_id"] = f.image_id;
    row["phase"] = f.phase;
    row["kind"] = f.kind;
    row["message"] = f.message;
    error_rows.push_back(std::move(row));
  }
  errors_json["errors"] = std::move(error_rows);
  write_json_file(errors_json, reports_dir / "errors.json");

  {
    std::vector<std::string> failed_ids;
    for (const FailedImage& f : result.failures) failed_ids.push_back(f.image_id);
    std::sort(failed_ids.begin(), failed_ids.end());
    failed_ids.erase(std::unique(failed_ids.begin(), failed_ids.end()),
                     failed_ids.end());
    result.n_failed = static_cast<int>(failed_ids.size());
  }
  result.n_ok = static_cast<int>(rendered_ok.size());

  json run_json;
  run_json["dataset_id"] = manifest.dataset_id;
  run_json["version"] = provenance.version;
  run_json["config_hash"] = provenance.config_hash;
  run_json["profile"] = config.profile;
  run_json["seed"] = config.seed;
  run_json["n_samples"] = config.n_samples;
  run_json["R"] = config.R;
  run_json["bin_mode"] = bin_mode_name(bin_mode);
  run_json["colormap"] = config.colormap;
  run_json["caption_backend"] = backends.captions->id();
  run_json["embedding_backend"] = backends.embeddings->id();
  json counts;
  counts["total"] = result.n_total;
  counts["ok"] = result.n_ok;
  counts["failed"] = result.n_failed;
  run_json["counts"] = std::move(counts);
  write_json_file(run_json, result.out_dir / "run.json");

  // Quarantine budget: the run itself fails only when more than 10% of the
  // manifest failed, and only after every artifact above is on disk.
  if (result.n_total > 0 &&
      static_cast<double>(result.n_failed) > 0.10 * result.n_total) {
    throw DataError("run_pipeline: " + std::to_string(result.n_failed) + " of " +
                    std::to_string(result.n_total) +
                    " images failed (over the 10% quarantine budget); see " +
                    (reports_dir / "errors.json").string());
  }
  return result;
}

}  // namespace fsum

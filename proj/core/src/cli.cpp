#include "fsum/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsum/analysis.hpp"
#include "fsum/backends.hpp"
#include "fsum/baselines.hpp"
#include "fsum/config.hpp"
#include "fsum/csv.hpp"
#include "fsum/errors.hpp"
#include "fsum/foveation.hpp"
#include "fsum/fsum_map.hpp"
#include "fsum/io.hpp"
#include "fsum/manifest.hpp"
#include "fsum/pipeline.hpp"
#include "fsum/render.hpp"
#include "fsum/scoring.hpp"
#include "fsum/version.hpp"

namespace fsum {
namespace {

using nlohmann::json;

RunConfig load_or_default(const std::string& config_path) {
  RunConfig config;
  if (!config_path.empty()) config = load_config(config_path);
  config.validate();
  return config;
}

FixationPoint parse_fixation(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw ConfigError("--fixation expects \"x,y\", got '" + text + "'");
  }
  try {
    std::size_t used = 0;
    const std::string xs = text.substr(0, comma);
    const std::string ys = text.substr(comma + 1);
    const double x = std::stod(xs, &used);
    if (used != xs.size()) throw std::invalid_argument(xs);
    const double y = std::stod(ys, &used);
    if (used != ys.size()) throw std::invalid_argument(ys);
    return FixationPoint{x, y};
  } catch (const std::exception&) {
    throw ConfigError("--fixation expects \"x,y\", got '" + text + "'");
  }
}

Measure parse_measure(const std::string& name) {
  if (name == "rt") return Measure::RtMs;
  if (name == "saccades") return Measure::SaccadeCount;
  throw ConfigError("unknown measure '" + name + "' (expected rt | saccades)");
}

void print_report_table(const std::vector<CorrelationReport>& reports,
                        std::ostream& out) {
  out << std::left << std::setw(22) << "metric" << std::right << std::setw(9) << "r"
      << std::setw(10) << "ci_low" << std::setw(10) << "ci_high" << std::setw(10)
      << "p_delta" << std::setw(10) << "n_images" << "  scheme\n";
  for (const CorrelationReport& report : reports) {
    out << std::left << std::setw(22) << report.metric_name << std::right
        << std::fixed << std::setprecision(4) << std::setw(9) << report.r
        << std::setw(10) << report.ci_low << std::setw(10) << report.ci_high;
    if (report.p_delta) {
      out << std::setw(10) << *report.p_delta;
    } else {
      out << std::setw(10) << "-";
    }
    out << std::setw(10) << report.n_images << "  " << report.bootstrap_scheme
        << "\n";
    out.unsetf(std::ios::floatfield);
  }
}

// Runs analyze_metrics + the human-consistency row and writes/prints reports.
void run_analysis(const std::vector<BehavioralRecord>& records,
                  const std::vector<MetricScore>& scores, const AnalyzeOptions& options,
                  Measure measure, const Provenance& provenance,
                  const std::filesystem::path& out_csv,
                  const std::filesystem::path& out_json) {
  std::vector<CorrelationReport> reports = analyze_metrics(records, scores, options);
  try {
    reports.push_back(human_consistency_report(records, measure));
  } catch (const CoverageError& e) {
    std::cerr << "note: human-human consistency unavailable: " << e.what() << "\n";
  }
  if (!out_csv.empty()) write_reports_csv(reports, out_csv, &provenance);
  if (!out_json.empty()) write_reports_json(reports, out_json, &provenance);
  print_report_table(reports, std::cout);
}

// Screens out records whose description drifts from the image's human
// references (validity gate); records without a description or references
// pass through untouched.
std::vector<BehavioralRecord> screen_records(const std::vector<BehavioralRecord>& records,
                                             const Manifest& manifest,
                                             EmbeddingBackend& embeddings,
                                             double threshold) {
  std::map<std::string, const ManifestEntry*> by_id;
  for (const ManifestEntry& entry : manifest.entries) by_id[entry.image_id] = &entry;

  std::vector<BehavioralRecord> kept;
  kept.reserve(records.size());
  long long dropped = 0;
  for (const BehavioralRecord& rec : records) {
    bool keep = true;
    if (rec.description) {
      const auto it = by_id.find(rec.image_id);
      if (it != by_id.end() && !it->second->human_references.empty()) {
        keep = validity_keep(*rec.description, it->second->human_references, embeddings,
                             threshold);
      }
    }
    if (keep) {
      kept.push_back(rec);
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) {
    std::cerr << "screened out " << dropped << " of " << records.size()
              << " records (validity threshold " << threshold << ")\n";
  }
  return kept;
}

struct ScoredMaps {
  std::vector<ScoreReport> reports;
  NormalizationStats difficulty_stats;
};

// Scores a set of normalized maps and assigns dataset difficulties, falling
// back to flat 0.5 when every s_raw is identical.
ScoredMaps score_with_difficulty(const std::vector<Matrix>& normalized,
                                 const std::vector<std::string>& image_ids,
                                 const ScoreOptions& options, const std::string& source) {
  ScoredMaps out;
  out.reports.reserve(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    out.reports.push_back(score_map(normalized[i], image_ids[i], options));
  }
  std::vector<double> s_raws;
  s_raws.reserve(out.reports.size());
  for (const ScoreReport& r : out.reports) s_raws.push_back(r.s_raw);
  try {
    auto [difficulties, stats] = difficulty_from_scores(s_raws, source);
    out.difficulty_stats = stats;
    for (std::size_t i = 0; i < out.reports.size(); ++i) {
      out.reports[i].difficulty = difficulties[i];
    }
  } catch (const DegenerateInputError&) {
    out.difficulty_stats.global_min = s_raws.front();
    out.difficulty_stats.global_max = s_raws.front();
    out.difficulty_stats.source = source;
    out.difficulty_stats.n_values = static_cast<long long>(s_raws.size());
    for (ScoreReport& r : out.reports) {
      r.difficulty = apply_difficulty(r.s_raw, out.difficulty_stats, true);
    }
  }
  return out;
}

void write_score_outputs(const ScoredMaps& scored, const std::filesystem::path& out_csv,
                         const Provenance& provenance, int R, BinMode bin_mode) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"# config_hash=" + provenance.config_hash +
                  " version=" + provenance.version});
  rows.push_back({"image_id", "s_raw", "difficulty"});
  for (const ScoreReport& r : scored.reports) {
    rows.push_back({r.image_id, format_double(r.s_raw), format_double(r.difficulty)});
  }
  write_csv(out_csv, rows);

  std::filesystem::path out_json = out_csv;
  out_json.replace_extension(".json");
  json j;
  j["R"] = R;
  j["bin_mode"] = bin_mode_name(bin_mode);
  json score_rows = json::array();
  for (const ScoreReport& r : scored.reports) {
    json row;
    row["image_id"] = r.image_id;
    row["k_values"] = r.k_values;
    row["s_raw"] = r.s_raw;
    row["difficulty"] = r.difficulty;
    row["n_cells"] = r.n_cells;
    score_rows.push_back(std::move(row));
  }
  j["scores"] = std::move(score_rows);
  j["config_hash"] = provenance.config_hash;
  j["version"] = provenance.version;
  if (out_json.has_parent_path()) {
    std::filesystem::create_directories(out_json.parent_path());
  }
  std::ofstream file(out_json, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("cannot write " + out_json.string());
  file << j.dump(2) << "\n";
  if (!file) throw DataError("short write to " + out_json.string());
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"F-SUM: foveated scene understanding maps"};
  app.set_version_flag("--version", kVersion);
  app.fallthrough(true);
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "TOML-style run configuration file");

  // --- foveate ---------------------------------------------------------------
  auto* cmd_foveate =
      app.add_subcommand("foveate", "Apply space-variant blur around one fixation");
  std::string fov_input, fov_fixation, fov_out;
  cmd_foveate->add_option("--input", fov_input, "Input image (PNG/JPEG)")->required();
  cmd_foveate->add_option("--fixation", fov_fixation, "Fixation point as \"x,y\" pixels")
      ->required();
  cmd_foveate->add_option("--out", fov_out, "Output PNG path")->required();
  double fov_sigma = 0.0, fov_k = 0.0, fov_alpha = 0.0, fov_p_scale = 0.0;
  int fov_levels = 0;
  auto* opt_sigma = cmd_foveate->add_option("--sigma", fov_sigma, "Transfer sigma");
  auto* opt_k = cmd_foveate->add_option("--k", fov_k, "Transfer steepness k");
  auto* opt_alpha = cmd_foveate->add_option("--alpha", fov_alpha, "Falloff alpha");
  auto* opt_p_scale =
      cmd_foveate->add_option("--p-scale", fov_p_scale, "Eccentricity scale in pixels");
  auto* opt_levels =
      cmd_foveate->add_option("--levels", fov_levels, "Pyramid levels (>= 2)");
  cmd_foveate->callback([&] {
    RunConfig config = load_or_default(config_path);
    FoveationParams params = config.foveation;
    if (opt_sigma->count() > 0) params.sigma_base = fov_sigma;
    if (opt_k->count() > 0) params.k = fov_k;
    if (opt_alpha->count() > 0) params.alpha = fov_alpha;
    if (opt_p_scale->count() > 0) params.p_scale = fov_p_scale;
    if (opt_levels->count() > 0) params.pyramid_levels = fov_levels;
    params.validate();

    const ImageBuffer image = load_image(fov_input);
    const FixationPoint fixation = parse_fixation(fov_fixation);
    if (fixation.x < 0.0 || fixation.x >= image.width || fixation.y < 0.0 ||
        fixation.y >= image.height) {
      throw ConfigError("--fixation (" + fov_fixation + ") lies outside the " +
                        std::to_string(image.width) + "x" +
                        std::to_string(image.height) + " image");
    }
    save_png(foveate(image, fixation, params), fov_out);
    std::cout << "wrote " << fov_out << "\n";
  });

  // --- build -----------------------------------------------------------------
  auto* cmd_build =
      app.add_subcommand("build", "Build F-SUM maps for every manifest image");
  std::string build_manifest, build_out;
  cmd_build->add_option("--manifest", build_manifest, "Dataset manifest JSON")
      ->required();
  cmd_build->add_option("--out", build_out, "Output directory")->required();
  cmd_build->callback([&] {
    RunConfig config = load_or_default(config_path);
    const Manifest manifest = load_manifest(build_manifest);
    const BackendStack backends = make_backends(config);
    const Provenance provenance{config_hash(config), kVersion};

    std::vector<FSumMap> maps;
    maps.reserve(manifest.entries.size());
    for (const ManifestEntry& entry : manifest.entries) {
      const ImageBuffer image =
          load_image(resolve_entry_path(build_manifest, entry));
      BuildOptions options;
      options.image_id = entry.image_id;
      options.n_samples = config.n_samples;
      options.temperature = config.effective_temperature();
      options.foveation = config.foveation;
      options.workers = config.workers;
      maps.push_back(
          build_fsum(image, *backends.captions, *backends.embeddings, options));
    }
    if (maps.empty()) throw DataError("build: manifest has no entries");

    std::vector<Matrix> raws;
    raws.reserve(maps.size());
    for (const FSumMap& m : maps) raws.push_back(m.raw);
    NormalizationStats stats;
    try {
      auto [normalized, pooled] = normalize_maps(raws, manifest.dataset_id);
      stats = pooled;
      for (std::size_t i = 0; i < maps.size(); ++i) {
        maps[i].normalized = std::move(normalized[i]);
        maps[i].stats_ref = manifest.dataset_id;
      }
    } catch (const DegenerateInputError&) {
      stats.global_min = raws.front().values.front();
      stats.global_max = stats.global_min;
      stats.source = manifest.dataset_id;
      stats.n_values = 0;
      for (const Matrix& m : raws) stats.n_values += static_cast<long long>(m.size());
      for (FSumMap& m : maps) {
        m.normalized = apply_normalization(m.raw, stats, true);
        m.stats_ref = manifest.dataset_id;
      }
    }

    const std::filesystem::path out_dir(build_out);
    save_stats_json(stats, out_dir / "normalization_stats.json", &provenance);
    for (const FSumMap& m : maps) {
      save_fsum_json(m, out_dir / "maps" / (m.image_id + ".json"), &provenance);
    }
    std::cout << "built " << maps.size() << " maps -> " << out_dir.string() << "\n";
  });

  // --- score -----------------------------------------------------------------
  auto* cmd_score =
      app.add_subcommand("score", "Score saved maps with weighted Ripley's K");
  std::string score_maps_dir, score_out, score_stats;
  cmd_score->add_option("--maps", score_maps_dir, "Directory of map JSON files")
      ->required();
  cmd_score->add_option("--out", score_out, "Output CSV path (JSON written beside it)")
      ->required();
  cmd_score->add_option("--stats", score_stats,
                        "Normalization stats JSON (for maps saved without a "
                        "normalized plane)");
  cmd_score->callback([&] {
    RunConfig config = load_or_default(config_path);
    const BinMode bin_mode = parse_bin_mode(config.bin_mode);
    const Provenance provenance{config_hash(config), kVersion};
    if (std::filesystem::path(score_out).extension() == ".json") {
      throw ConfigError("score --out expects a .csv path (the JSON twin is "
                        "written beside it)");
    }

    std::vector<std::filesystem::path> files;
    for (const auto& dir_entry :
         std::filesystem::directory_iterator(score_maps_dir)) {
      if (!dir_entry.is_regular_file()) continue;
      const auto& p = dir_entry.path();
      if (p.extension() == ".json" && p.filename() != "normalization_stats.json") {
        files.push_back(p);
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw DataError("score: no map JSON files in " + score_maps_dir);
    }

    std::optional<NormalizationStats> stats;
    if (!score_stats.empty()) {
      stats = load_stats_json(score_stats);
    } else {
      for (const auto& candidate :
           {std::filesystem::path(score_maps_dir) / "normalization_stats.json",
            std::filesystem::path(score_maps_dir).parent_path() /
                "normalization_stats.json"}) {
        if (std::filesystem::exists(candidate)) {
          stats = load_stats_json(candidate);
          break;
        }
      }
    }

    std::vector<Matrix> normalized;
    std::vector<std::string> image_ids;
    for (const auto& file : files) {
      FSumMap map = load_fsum_json(file);
      if (map.normalized.empty()) {
        if (!stats) {
          throw ConfigError("score: " + file.string() +
                            " has no normalized plane and no normalization stats "
                            "were found; pass --stats");
        }
        map.normalized = apply_normalization(map.raw, *stats, false);
      }
      normalized.push_back(std::move(map.normalized));
      image_ids.push_back(map.image_id);
    }

    ScoreOptions options;
    options.R = config.R;
    options.bin_mode = bin_mode;
    const ScoredMaps scored = score_with_difficulty(
        normalized, image_ids, options,
        stats ? stats->source : std::string("score-run"));
    write_score_outputs(scored, score_out, provenance, config.R, bin_mode);
    std::cout << "scored " << scored.reports.size() << " maps -> " << score_out
              << "\n";
  });

  // --- baseline ----------------------------------------------------------------
  auto* cmd_baseline =
      app.add_subcommand("baseline", "Compute a baseline difficulty metric");
  std::string base_metric, base_manifest, base_out;
  int base_n = 10;
  double base_threshold = 0.1;
  bool base_per_token = false;
  cmd_baseline
      ->add_option("--metric", base_metric,
                   "entropy | prompted | pixel-entropy | edge-density")
      ->required();
  cmd_baseline->add_option("--manifest", base_manifest, "Dataset manifest JSON")
      ->required();
  cmd_baseline->add_option("--out", base_out, "Output CSV path")->required();
  cmd_baseline->add_option("--n", base_n, "Entropy caption samples (default 10)");
  cmd_baseline->add_option("--threshold", base_threshold,
                           "Edge-density gradient threshold (default 0.1)");
  cmd_baseline->add_flag("--per-token", base_per_token,
                         "Length-normalized entropy variant");
  cmd_baseline->callback([&] {
    RunConfig config = load_or_default(config_path);
    const Manifest manifest = load_manifest(base_manifest);
    const Provenance provenance{config_hash(config), kVersion};
    const bool needs_backend = base_metric == "entropy" || base_metric == "prompted";
    if (base_metric != "entropy" && base_metric != "prompted" &&
        base_metric != "pixel-entropy" && base_metric != "edge-density") {
      throw ConfigError("unknown baseline metric '" + base_metric + "'");
    }
    BackendStack backends;
    if (needs_backend) backends = make_backends(config);

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"# config_hash=" + provenance.config_hash +
                    " version=" + provenance.version});
    rows.push_back({"image_id", "metric_name", "value"});
    for (const ManifestEntry& entry : manifest.entries) {
      const ImageBuffer image = load_image(resolve_entry_path(base_manifest, entry));
      double value = 0.0;
      if (base_metric == "entropy") {
        value = language_entropy(image, *backends.captions, base_n,
                                 config.effective_temperature(), base_per_token)
                    .h_hat;
      } else if (base_metric == "prompted") {
        value = prompted_difficulty(image, *backends.captions).score;
      } else if (base_metric == "pixel-entropy") {
        value = pixel_entropy(image);
      } else {
        value = edge_density(image, base_threshold);
      }
      rows.push_back({entry.image_id, base_metric, format_double(value)});
    }
    write_csv(base_out, rows);
    std::cout << "wrote " << manifest.entries.size() << " " << base_metric
              << " scores -> " << base_out << "\n";
  });

  // --- analyze -----------------------------------------------------------------
  auto* cmd_analyze =
      app.add_subcommand("analyze", "Correlate metrics against behavior");
  std::string an_behavior, an_scores, an_reference = "fsum", an_measure = "rt";
  std::string an_scheme, an_out_csv, an_out_json, an_manifest;
  bool an_screen = false;
  std::uint64_t an_seed = 0;
  int an_n_boot = -1;
  cmd_analyze->add_option("--behavior", an_behavior, "Behavioral CSV")->required();
  cmd_analyze->add_option("--scores", an_scores, "Metric CSV (image_id,metric_name,value)")
      ->required();
  cmd_analyze->add_option("--reference-metric", an_reference,
                          "Reference metric for delta tests (default fsum)");
  cmd_analyze->add_option("--measure", an_measure, "rt | saccades (default rt)");
  auto* opt_seed = cmd_analyze->add_option("--seed", an_seed, "Bootstrap seed");
  cmd_analyze->add_option("--scheme", an_scheme,
                          "Bootstrap scheme: images | participants");
  cmd_analyze->add_option("--n-boot", an_n_boot, "Bootstrap resamples");
  cmd_analyze->add_option("--out-csv", an_out_csv, "Report CSV path");
  cmd_analyze->add_option("--out-json", an_out_json, "Report JSON path");
  cmd_analyze->add_option("--manifest", an_manifest,
                          "Manifest with human references (for --screen)");
  cmd_analyze->add_flag("--screen", an_screen,
                        "Drop records whose description fails the validity gate");
  cmd_analyze->callback([&] {
    RunConfig config = load_or_default(config_path);
    if (opt_seed->count() > 0) config.seed = an_seed;
    if (an_n_boot >= 0) config.n_boot = an_n_boot;
    if (!an_scheme.empty()) config.bootstrap_scheme = an_scheme;
    config.validate();
    const Provenance provenance{config_hash(config), kVersion};
    const Measure measure = parse_measure(an_measure);

    std::vector<BehavioralRecord> records = read_behavioral_csv(an_behavior);
    if (an_screen) {
      if (an_manifest.empty()) {
        throw ConfigError("--screen requires --manifest (human references)");
      }
      const Manifest manifest = load_manifest(an_manifest);
      const BackendStack backends = make_backends(config);
      records = screen_records(records, manifest, *backends.embeddings,
                               config.validity_threshold);
    }

    AnalyzeOptions options;
    options.measure = measure;
    options.reference_metric = an_reference;
    options.n_boot = config.n_boot;
    options.seed = config.seed;
    options.scheme = parse_bootstrap_scheme(config.bootstrap_scheme);
    run_analysis(records, read_metric_csv(an_scores), options, measure, provenance,
                 an_out_csv, an_out_json);
  });

  // --- render ------------------------------------------------------------------
  auto* cmd_render = app.add_subcommand("render", "Render a saved map as a heatmap");
  std::string ren_map, ren_image, ren_mode = "overlay", ren_out, ren_image_id;
  double ren_alpha = 0.5;
  cmd_render->add_option("--map", ren_map, "Map JSON path")->required();
  cmd_render->add_option("--image", ren_image, "Source image path")->required();
  cmd_render->add_option("--mode", ren_mode, "standalone | overlay (default overlay)");
  cmd_render->add_option("--out", ren_out, "Output PNG path")->required();
  cmd_render->add_option("--image-id", ren_image_id,
                         "Image id for the overlay alignment check "
                         "(default: the map's own id)");
  cmd_render->add_option("--alpha", ren_alpha, "Overlay heat weight (default 0.5)");
  cmd_render->callback([&] {
    RunConfig config = load_or_default(config_path);
    const FSumMap map = load_fsum_json(ren_map);
    const ImageBuffer image = load_image(ren_image);
    RenderOptions options;
    if (ren_mode == "standalone") {
      options.mode = RenderMode::Standalone;
    } else if (ren_mode == "overlay") {
      options.mode = RenderMode::Overlay;
    } else {
      throw ConfigError("unknown render mode '" + ren_mode + "'");
    }
    options.colormap = config.colormap;
    options.alpha = ren_alpha;
    const std::string id = ren_image_id.empty() ? map.image_id : ren_image_id;
    save_png(render_heatmap(map, image, id, options), ren_out);
    std::cout << "wrote " << ren_out << "\n";
  });

  // --- run ---------------------------------------------------------------------
  auto* cmd_run = app.add_subcommand("run", "End-to-end pipeline over a manifest");
  std::string run_manifest, run_out = "out", run_behavior, run_measure = "rt";
  std::string run_reference = "fsum";
  cmd_run->add_option("--manifest", run_manifest, "Dataset manifest JSON")->required();
  cmd_run->add_option("--out", run_out, "Artifact root directory (default out)");
  cmd_run->add_option("--behavior", run_behavior,
                      "Behavioral CSV; when given, analysis runs after the "
                      "pipeline into reports/");
  cmd_run->add_option("--measure", run_measure, "rt | saccades (default rt)");
  cmd_run->add_option("--reference-metric", run_reference,
                      "Reference metric for delta tests (default fsum)");
  cmd_run->callback([&] {
    RunConfig config = load_or_default(config_path);
    const Manifest manifest = load_manifest(run_manifest);
    const BackendStack backends = make_backends(config);
    const PipelineResult result =
        run_pipeline(manifest, run_manifest, config, run_out, backends);
    std::cout << "dataset " << manifest.dataset_id << ": " << result.n_ok << "/"
              << result.n_total << " images ok, " << result.n_failed << " failed\n";
    std::cout << "artifacts: " << result.out_dir.string() << "\n";
    if (result.n_failed > 0) {
      std::cout << "quarantine ledger: "
                << (result.out_dir / "reports" / "errors.json").string() << "\n";
    }

    if (!run_behavior.empty()) {
      const Provenance provenance{config_hash(config), kVersion};
      const Measure measure = parse_measure(run_measure);
      AnalyzeOptions options;
      options.measure = measure;
      options.reference_metric = run_reference;
      options.n_boot = config.n_boot;
      options.seed = config.seed;
      options.scheme = parse_bootstrap_scheme(config.bootstrap_scheme);
      run_analysis(read_behavioral_csv(run_behavior),
                   read_metric_csv(result.out_dir / "reports" / "metrics.csv"),
                   options, measure, provenance,
                   result.out_dir / "reports" / "analysis.csv",
                   result.out_dir / "reports" / "analysis.json");
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace fsum

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsum/backends.hpp"
#include "fsum/cache.hpp"
#include "fsum/cli.hpp"
#include "fsum/config.hpp"
#include "fsum/csv.hpp"
#include "fsum/errors.hpp"
#include "fsum/image.hpp"
#include "fsum/io.hpp"
#include "fsum/manifest.hpp"
#include "fsum/pipeline.hpp"
#include "fsum/version.hpp"
#include "test_util.hpp"

using namespace fsum;
namespace fs = std::filesystem;
using fsum::test::TempDir;
using fsum::test::noise_image;
using nlohmann::json;

namespace {

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("fsum");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

// Writes n noise images and a manifest referencing them; returns the manifest
// path.  `with_refs` attaches five human reference captions to every image.
fs::path make_dataset(const fs::path& root, int n, uint64_t seed0,
                      bool with_refs = false, const std::string& dataset_id = "ds") {
  fs::create_directories(root / "images");
  Manifest manifest;
  manifest.dataset_id = dataset_id;
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img-%02d", i);
    const ImageBuffer image = noise_image(64, 48, seed0 + static_cast<uint64_t>(i));
    save_png(image, root / "images" / (std::string(name) + ".png"));
    ManifestEntry entry;
    entry.image_id = name;
    entry.path = "images/" + std::string(name) + ".png";
    if (with_refs) {
      for (int r = 0; r < 5; ++r) {
        entry.human_references.push_back("reference " + std::to_string(r) + " for " +
                                         name + ".");
      }
    }
    manifest.entries.push_back(std::move(entry));
  }
  const fs::path manifest_path = root / "manifest.json";
  save_manifest(manifest, manifest_path);
  return manifest_path;
}

std::string stub_config_text(const fs::path& cache_dir, int n_samples = 2,
                             int n_boot = 300) {
  return "[run]\n"
         "profile = \"stub\"\n"
         "seed = 11\n"
         "workers = 2\n"
         "cache_dir = \"" + cache_dir.string() + "\"\n"
         "\n[map]\n"
         "n_samples = " + std::to_string(n_samples) + "\n"
         "\n[analysis]\n"
         "n_boot = " + std::to_string(n_boot) + "\n";
}

// Relative path -> file bytes, for byte-identical tree comparison.
std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out[fs::relative(entry.path(), root).string()] =
        fsum::test::read_text_file(entry.path());
  }
  return out;
}

// Parses a provenance-stamped CSV into data rows (comment + header dropped).
std::vector<std::vector<std::string>> data_rows(const fs::path& csv_path) {
  auto rows = read_csv(csv_path);
  std::vector<std::vector<std::string>> out;
  bool header_skipped = false;
  for (auto& row : rows) {
    if (!row.empty() && !row[0].empty() && row[0][0] == '#') continue;
    if (!header_skipped) {
      header_skipped = true;
      continue;
    }
    out.push_back(std::move(row));
  }
  return out;
}

class CountingCaptions : public CaptionBackend {
 public:
  explicit CountingCaptions(std::shared_ptr<CaptionBackend> inner)
      : inner_(std::move(inner)) {}
  std::string id() const override { return inner_->id(); }
  bool provides_loglik() const override { return inner_->provides_loglik(); }
  CaptionSample describe_one(const ImageBuffer& image, const std::string& prompt,
                             double temperature, int sample_index) override {
    ++calls;
    return inner_->describe_one(image, prompt, temperature, sample_index);
  }
  std::atomic<long> calls{0};

 private:
  std::shared_ptr<CaptionBackend> inner_;
};

class CountingEmbeddings : public EmbeddingBackend {
 public:
  explicit CountingEmbeddings(std::shared_ptr<EmbeddingBackend> inner)
      : inner_(std::move(inner)) {}
  std::string id() const override { return inner_->id(); }
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    ++calls;
    return inner_->embed(texts);
  }
  std::atomic<long> calls{0};

 private:
  std::shared_ptr<EmbeddingBackend> inner_;
};

// Stub-backed stack with call counters in front of the shared disk cache.
struct CountingStack {
  BackendStack stack;
  std::shared_ptr<CountingCaptions> captions;
  std::shared_ptr<CountingEmbeddings> embeddings;
};

CountingStack counting_stack(const RunConfig& config, std::shared_ptr<DiskCache> cache) {
  CountingStack out;
  out.captions =
      std::make_shared<CountingCaptions>(std::make_shared<StubCaptionBackend>(config.stub_salt));
  out.embeddings = std::make_shared<CountingEmbeddings>(
      std::make_shared<StubEmbeddingBackend>(config.stub_embedding_dim));
  out.stack.cache = std::move(cache);
  out.stack.captions = std::make_shared<CachedCaptionBackend>(out.captions, out.stack.cache);
  out.stack.embeddings =
      std::make_shared<CachedEmbeddingBackend>(out.embeddings, out.stack.cache);
  return out;
}

struct EnvGuard {
  EnvGuard(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
  ~EnvGuard() { ::unsetenv(name_); }
  const char* name_;
};

}  // namespace

TEST_CASE("pipeline writes every artifact and replays byte-identically from cache") {
  TempDir dir;
  const fs::path manifest_path = make_dataset(dir.path(), 4, 100, /*with_refs=*/true);
  const Manifest manifest = load_manifest(manifest_path);

  RunConfig config;
  config.n_samples = 2;
  config.workers = 2;
  config.cache_dir = (dir / "cache").string();
  config.validate();

  auto cache = std::make_shared<DiskCache>(dir / "cache");
  CountingStack first = counting_stack(config, cache);
  const PipelineResult result =
      run_pipeline(manifest, manifest_path, config, dir / "out1", first.stack);

  CHECK(result.n_total == 4);
  CHECK(result.n_ok == 4);
  CHECK(result.n_failed == 0);
  CHECK(result.failures.empty());
  CHECK(result.out_dir == dir / "out1" / "ds");
  CHECK(first.captions->calls.load() > 0);
  CHECK(first.embeddings->calls.load() > 0);

  const fs::path out = result.out_dir;
  for (const char* rel : {"scores/scores.json", "scores/scores.csv",
                          "reports/normalization_stats.json",
                          "reports/difficulty_stats.json", "reports/metrics.csv",
                          "reports/errors.json", "run.json"}) {
    CAPTURE(rel);
    CHECK(fs::exists(out / rel));
  }
  for (const ManifestEntry& entry : manifest.entries) {
    CHECK(fs::exists(out / "maps" / (entry.image_id + ".json")));
    CHECK(fs::exists(out / "renders" / (entry.image_id + ".png")));
  }

  const json run_info = json::parse(fsum::test::read_text_file(out / "run.json"));
  CHECK(run_info.at("dataset_id") == "ds");
  CHECK(run_info.at("profile") == "stub");
  CHECK(run_info.at("caption_backend") == "stub-caption");
  CHECK(run_info.at("embedding_backend") == "stub-embedding");
  CHECK(run_info.at("config_hash") == config_hash(config));
  CHECK(run_info.at("version") == kVersion);
  CHECK(run_info.at("counts").at("total") == 4);
  CHECK(run_info.at("counts").at("ok") == 4);
  CHECK(run_info.at("counts").at("failed") == 0);

  const json scores = json::parse(fsum::test::read_text_file(out / "scores/scores.json"));
  CHECK(scores.at("config_hash") == config_hash(config));
  REQUIRE(scores.at("scores").size() == 4);
  for (const json& row : scores.at("scores")) {
    CHECK(row.at("k_values").size() == 10);  // R = 10
    CHECK(row.at("difficulty").get<double>() >= 0.0);
    CHECK(row.at("difficulty").get<double>() <= 1.0);
    CHECK(row.at("n_cells").get<int>() >= 108);
  }

  const json errors = json::parse(fsum::test::read_text_file(out / "reports/errors.json"));
  CHECK(errors.at("errors").empty());

  // Second run, same cache, fresh counters: zero provider calls and a
  // byte-identical artifact tree.
  CountingStack second = counting_stack(config, cache);
  run_pipeline(manifest, manifest_path, config, dir / "out2", second.stack);
  CHECK(second.captions->calls.load() == 0);
  CHECK(second.embeddings->calls.load() == 0);

  const auto tree1 = snapshot_tree(dir / "out1");
  const auto tree2 = snapshot_tree(dir / "out2");
  REQUIRE(tree1.size() == tree2.size());
  for (const auto& [rel, bytes] : tree1) {
    CAPTURE(rel);
    REQUIRE(tree2.count(rel) == 1);
    CHECK(bytes == tree2.at(rel));
  }
}

TEST_CASE("pipeline quarantines failures and enforces the 10 percent budget") {
  TempDir dir;
  RunConfig config;
  config.n_samples = 2;
  config.cache_dir = (dir / "cache").string();
  auto cache = std::make_shared<DiskCache>(dir / "cache");

  SUBCASE("one bad image in ten stays within budget") {
    const fs::path manifest_path = make_dataset(dir.path(), 10, 200);
    Manifest manifest = load_manifest(manifest_path);
    manifest.entries[3].path = "images/definitely-missing.png";
    save_manifest(manifest, manifest_path);

    CountingStack stack = counting_stack(config, cache);
    const PipelineResult result =
        run_pipeline(manifest, manifest_path, config, dir / "out", stack.stack);
    CHECK(result.n_total == 10);
    CHECK(result.n_ok == 9);
    CHECK(result.n_failed == 1);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].image_id == "img-03");
    CHECK(result.failures[0].phase == "load");
    CHECK(result.failures[0].kind == "data");

    const json errors = json::parse(
        fsum::test::read_text_file(result.out_dir / "reports/errors.json"));
    REQUIRE(errors.at("errors").size() == 1);
    CHECK(errors["errors"][0].at("image_id") == "img-03");
    CHECK(errors["errors"][0].at("phase") == "load");
    CHECK(errors["errors"][0].at("kind") == "data");
    CHECK_FALSE(fs::exists(result.out_dir / "maps/img-03.json"));
    CHECK(fs::exists(result.out_dir / "maps/img-04.json"));

    const json run_info =
        json::parse(fsum::test::read_text_file(result.out_dir / "run.json"));
    CHECK(run_info.at("counts").at("failed") == 1);
    CHECK(run_info.at("counts").at("ok") == 9);
  }

  SUBCASE("one bad image in three fails the run after writing artifacts") {
    const fs::path manifest_path = make_dataset(dir.path(), 3, 300);
    Manifest manifest = load_manifest(manifest_path);
    manifest.entries[0].path = "images/definitely-missing.png";
    save_manifest(manifest, manifest_path);

    CountingStack stack = counting_stack(config, cache);
    CHECK_THROWS_AS(
        run_pipeline(manifest, manifest_path, config, dir / "out", stack.stack),
        DataError);

    // The artifacts for the surviving images and the ledger are all on disk.
    const fs::path out = dir / "out" / "ds";
    CHECK(fs::exists(out / "maps/img-01.json"));
    CHECK(fs::exists(out / "maps/img-02.json"));
    CHECK(fs::exists(out / "renders/img-02.png"));
    CHECK(fs::exists(out / "run.json"));
    const json errors =
        json::parse(fsum::test::read_text_file(out / "reports/errors.json"));
    REQUIRE(errors.at("errors").size() == 1);
    CHECK(errors["errors"][0].at("image_id") == "img-00");
  }
}

TEST_CASE("cli run, build, score and analyze agree end to end") {
  TempDir dir;
  const fs::path manifest_path = make_dataset(dir.path(), 6, 400);
  const std::string config_text = stub_config_text(dir / "cache");
  fsum::test::write_text_file(dir / "fsum.toml", config_text);
  const std::string cfg = (dir / "fsum.toml").string();
  const std::string expected_hash = config_hash(parse_config(config_text));

  // --- run ---
  REQUIRE(cli({"--config", cfg, "run", "--manifest", manifest_path.string(), "--out",
               (dir / "out").string()}) == 0);
  const fs::path out = dir / "out" / "ds";
  const json run_info = json::parse(fsum::test::read_text_file(out / "run.json"));
  CHECK(run_info.at("config_hash") == expected_hash);
  CHECK(run_info.at("counts").at("ok") == 6);

  // A second CLI run from the warm cache is byte-identical.
  REQUIRE(cli({"--config", cfg, "run", "--manifest", manifest_path.string(), "--out",
               (dir / "out-rerun").string()}) == 0);
  const auto tree1 = snapshot_tree(dir / "out");
  const auto tree2 = snapshot_tree(dir / "out-rerun");
  REQUIRE(tree1.size() == tree2.size());
  for (const auto& [rel, bytes] : tree1) {
    CAPTURE(rel);
    CHECK(bytes == tree2.at(rel));
  }

  // --- build + score reproduce the run's numbers ---
  REQUIRE(cli({"--config", cfg, "build", "--manifest", manifest_path.string(), "--out",
               (dir / "built").string()}) == 0);
  CHECK(fs::exists(dir / "built" / "normalization_stats.json"));
  for (int i = 0; i < 6; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img-%02d.json", i);
    CHECK(fs::exists(dir / "built" / "maps" / name));
  }

  REQUIRE(cli({"--config", cfg, "score", "--maps", (dir / "built" / "maps").string(),
               "--out", (dir / "scored" / "scores.csv").string()}) == 0);
  CHECK(fs::exists(dir / "scored" / "scores.json"));  // JSON twin

  std::map<std::string, std::pair<std::string, std::string>> from_run;
  for (const auto& row : data_rows(out / "scores/scores.csv")) {
    REQUIRE(row.size() == 3);
    from_run[row[0]] = {row[1], row[2]};
  }
  const auto scored = data_rows(dir / "scored" / "scores.csv");
  REQUIRE(scored.size() == 6);
  for (const auto& row : scored) {
    REQUIRE(from_run.count(row[0]) == 1);
    CHECK(row[1] == from_run[row[0]].first);   // identical s_raw
    CHECK(row[2] == from_run[row[0]].second);  // identical difficulty
  }

  // --- analyze against behavior constructed from the difficulty scores ---
  std::map<std::string, double> difficulty;
  for (const auto& row : data_rows(out / "reports/metrics.csv")) {
    REQUIRE(row.size() == 3);
    difficulty[row[0]] = std::stod(row[2]);
  }
  std::string behavior_csv =
      "participant_id,image_id,condition,rt_ms,saccade_count,description\n";
  for (const auto& [image_id, value] : difficulty) {
    for (int p = 0; p < 3; ++p) {
      behavior_csv += "p" + std::to_string(p) + "," + image_id + ",free-viewing," +
                      format_double(500.0 + 400.0 * value + 10.0 * p) + ",,\n";
    }
  }
  fsum::test::write_text_file(dir / "behavior.csv", behavior_csv);

  REQUIRE(cli({"--config", cfg, "analyze", "--behavior", (dir / "behavior.csv").string(),
               "--scores", (out / "reports/metrics.csv").string(), "--out-csv",
               (dir / "analysis.csv").string(), "--out-json",
               (dir / "analysis.json").string()}) == 0);

  const json analysis = json::parse(fsum::test::read_text_file(dir / "analysis.json"));
  CHECK(analysis.at("config_hash") == expected_hash);
  REQUIRE(analysis.at("reports").size() == 2);
  CHECK(analysis["reports"][0].at("metric") == "fsum");
  CHECK(analysis["reports"][0].at("r").get<double>() > 0.95);
  CHECK(analysis["reports"][0].at("p_delta").is_null());
  CHECK(analysis["reports"][0].at("n_images") == 6);
  CHECK(analysis["reports"][1].at("metric") == "human-human");
  CHECK(analysis["reports"][1].at("r").get<double>() > 0.95);

  const std::string analysis_csv = fsum::test::read_text_file(dir / "analysis.csv");
  CHECK(analysis_csv.rfind("# config_hash=" + expected_hash, 0) == 0);
}

TEST_CASE("cli baseline subcommand covers all four metrics offline") {
  TempDir dir;
  const fs::path manifest_path = make_dataset(dir.path(), 3, 500);
  fsum::test::write_text_file(dir / "fsum.toml", stub_config_text(dir / "cache"));
  const std::string cfg = (dir / "fsum.toml").string();

  for (const std::string metric : {"entropy", "prompted", "pixel-entropy", "edge-density"}) {
    CAPTURE(metric);
    const fs::path out_csv = dir / (metric + ".csv");
    std::vector<std::string> args = {"--config", cfg,       "baseline",
                                     "--metric", metric,    "--manifest",
                                     manifest_path.string(), "--out",
                                     out_csv.string()};
    if (metric == "entropy") {
      args.push_back("--n");
      args.push_back("3");
    }
    REQUIRE(cli(args) == 0);
    const auto rows = data_rows(out_csv);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
      REQUIRE(row.size() == 3);
      CHECK(row[1] == metric);
      const double value = std::stod(row[2]);
      CHECK(std::isfinite(value));
      if (metric != "entropy") {
        CHECK(value >= 0.0);
      }
      if (metric == "prompted") {
        CHECK(value <= 1.0);
      }
    }
  }
}

TEST_CASE("cli exit codes map the error taxonomy") {
  TempDir dir;
  fsum::test::write_text_file(dir / "fsum.toml", stub_config_text(dir / "cache"));
  const std::string cfg = (dir / "fsum.toml").string();

  SUBCASE("parse and config errors exit 2") {
    CHECK(cli({"no-such-subcommand"}) == 2);
    CHECK(cli({"--config", (dir / "missing.toml").string(), "run", "--manifest",
               "x.json"}) == 2);
    fsum::test::write_text_file(dir / "bad.toml", "[run]\nprofile = \"stub\"\nbogus_key = 1\n");
    CHECK(cli({"--config", (dir / "bad.toml").string(), "run", "--manifest", "x.json"}) ==
          2);
    fsum::test::write_text_file(dir / "badprofile.toml", "[run]\nprofile = \"quantum\"\n");
    CHECK(cli({"--config", (dir / "badprofile.toml").string(), "run", "--manifest",
               "x.json"}) == 2);

    const ImageBuffer image = noise_image(64, 48, 600);
    save_png(image, dir / "img.png");
    CHECK(cli({"foveate", "--input", (dir / "img.png").string(), "--fixation", "999,5",
               "--out", (dir / "o.png").string()}) == 2);
    CHECK(cli({"foveate", "--input", (dir / "img.png").string(), "--fixation", "oops",
               "--out", (dir / "o.png").string()}) == 2);
    CHECK(cli({"--config", cfg, "score", "--maps", dir.path().string(), "--out",
               (dir / "scores.json").string()}) == 2);
  }

  SUBCASE("backend capability gaps exit 3") {
    EnvGuard key("FSUM_API_KEY", "sk-test");
    fsum::test::write_text_file(dir / "closed.toml",
                                "[run]\n"
                                "profile = \"closed\"\n"
                                "cache_dir = \"" + (dir / "cache2").string() + "\"\n"
                                "[backends]\n"
                                "base_url = \"https://api.example.test\"\n"
                                "caption_model = \"cap\"\n"
                                "embedding_model = \"emb\"\n");
    const fs::path manifest_path = make_dataset(dir.path(), 1, 700);
    CHECK(cli({"--config", (dir / "closed.toml").string(), "baseline", "--metric",
               "entropy", "--manifest", manifest_path.string(), "--out",
               (dir / "e.csv").string()}) == 3);
  }

  SUBCASE("data errors exit 4") {
    CHECK(cli({"--config", cfg, "run", "--manifest", (dir / "absent.json").string()}) ==
          4);
    CHECK(cli({"--config", cfg, "analyze", "--behavior", (dir / "absent.csv").string(),
               "--scores", (dir / "absent2.csv").string()}) == 4);
  }

  SUBCASE("screen requires a manifest") {
    fsum::test::write_text_file(
        dir / "b.csv",
        "participant_id,image_id,condition,rt_ms,saccade_count,description\n"
        "p1,img1,free-viewing,500,,\n");
    fsum::test::write_text_file(dir / "m.csv", "image_id,metric_name,value\nimg1,fsum,0.5\n");
    CHECK(cli({"--config", cfg, "analyze", "--behavior", (dir / "b.csv").string(),
               "--scores", (dir / "m.csv").string(), "--screen"}) == 2);
  }
}

TEST_CASE("cli foveate and render produce loadable images") {
  TempDir dir;
  fsum::test::write_text_file(dir / "fsum.toml", stub_config_text(dir / "cache"));
  const std::string cfg = (dir / "fsum.toml").string();

  // A constant image survives foveation unchanged (up to 8-bit quantization).
  const ImageBuffer flat = ImageBuffer::constant(64, 48, 1, 0.6f);
  save_png(flat, dir / "flat.png");
  REQUIRE(cli({"foveate", "--input", (dir / "flat.png").string(), "--fixation", "32,24",
               "--out", (dir / "fov.png").string()}) == 0);
  const ImageBuffer foveated = load_image(dir / "fov.png");
  CHECK(foveated.width == 64);
  CHECK(foveated.height == 48);
  for (float v : foveated.pixels) CHECK(std::abs(v - 0.6f) <= 1.0f / 255.0f);

  // Render a freshly built map in both modes.
  const fs::path manifest_path = make_dataset(dir.path(), 1, 800);
  REQUIRE(cli({"--config", cfg, "build", "--manifest", manifest_path.string(), "--out",
               (dir / "built").string()}) == 0);
  const std::string map_path = (dir / "built" / "maps" / "img-00.json").string();
  const std::string image_path = (dir / "images" / "img-00.png").string();

  REQUIRE(cli({"--config", cfg, "render", "--map", map_path, "--image", image_path,
               "--out", (dir / "overlay.png").string()}) == 0);
  // The canvas is the image plus the colorbar strip on the right.
  const ImageBuffer overlay = load_image(dir / "overlay.png");
  CHECK(overlay.width > 64);
  CHECK(overlay.height == 48);
  CHECK(overlay.channels == 3);

  REQUIRE(cli({"--config", cfg, "render", "--map", map_path, "--image", image_path,
               "--mode", "standalone", "--out", (dir / "standalone.png").string()}) == 0);
  CHECK(fs::exists(dir / "standalone.png"));

  CHECK(cli({"--config", cfg, "render", "--map", map_path, "--image", image_path,
             "--mode", "sideways", "--out", (dir / "x.png").string()}) == 2);
}

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "fsum/backends.hpp"
#include "fsum/cache.hpp"
#include "fsum/config.hpp"
#include "fsum/errors.hpp"
#include "fsum/manifest.hpp"
#include "fsum/transport.hpp"

namespace fsum {

// Caption and embedding backends assembled for one profile, sharing a single
// disk cache so reruns replay recorded responses instead of recomputing.
struct BackendStack {
  std::shared_ptr<CaptionBackend> captions;
  std::shared_ptr<EmbeddingBackend> embeddings;
  std::shared_ptr<DiskCache> cache;
};

// Builds the backend stack for config.profile:
//   stub            -> deterministic offline backends; no HTTP layer is
//                      constructed at all, so stub runs cannot touch the network
//   open | closed   -> remote backends over the configured base URL, wrapped
//                      in retry-with-backoff and (when rate_limit_ms > 0) a
//                      minimum-interval rate limiter
// `transport` overrides the HTTP layer underneath retry/rate-limiting so tests
// can exercise remote profiles against an in-memory double.
BackendStack make_backends(const RunConfig& config,
                           std::shared_ptr<Transport> transport = nullptr);

// One quarantined image: which phase failed and why.
struct FailedImage {
  std::string image_id;
  std::string phase;  // load | map | score | render
  std::string kind;   // config | backend | data
  std::string message;
};

struct PipelineResult {
  std::filesystem::path out_dir;  // out_root / dataset_id
  int n_total = 0;
  int n_ok = 0;      // images that produced a map, a score and a render
  int n_failed = 0;  // images with at least one quarantined phase
  std::vector<FailedImage> failures;
};

// End-to-end dataset run.  Writes, under out_root/{dataset_id}/:
//   maps/{image_id}.json             raw + normalized F-SUM per image
//   scores/scores.json, scores.csv   K values, s_raw and difficulty per image
//   renders/{image_id}.png           heatmap overlay per image
//   reports/normalization_stats.json pooled map normalization
//   reports/difficulty_stats.json    dataset s_raw min/max
//   reports/metrics.csv              long-format difficulty ("fsum") scores
//   reports/errors.json              the quarantine ledger (always written)
//   run.json                         provenance: config hash, version, counts
// Per-image failures are quarantined into the ledger and the run continues;
// only when more than 10% of images fail does the run itself fail (DataError,
// thrown after every artifact is on disk).  All outputs are deterministic:
// two runs with equal config hashes produce byte-identical artifacts.
PipelineResult run_pipeline(const Manifest& manifest,
                            const std::filesystem::path& manifest_path,
                            const RunConfig& config,
                            const std::filesystem::path& out_root,
                            const BackendStack& backends);

// "config" | "backend" | "data" (the error ledger vocabulary).
const char* error_kind_name(ErrorKind kind);

}  // namespace fsum

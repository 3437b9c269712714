#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "fsum/backends.hpp"

namespace fsum {

// Content-addressed record store backed by a directory of JSON files.
//
// Keys are hex SHA-256 digests computed by the caller from every input that
// influences the payload (backend id, image content hash, prompt hash,
// temperature, sample index, ...).  Records are written atomically
// (temp file + rename) so a crashed writer never leaves a truncated record,
// and concurrent get_or_compute calls for the same key are deduplicated so
// the compute function runs at most once per process.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Returns the stored payload for `key`, or nullopt on miss.
  std::optional<std::string> get(const std::string& key) const;

  // Atomically persists `payload` under `key` (overwrites an existing record).
  void put(const std::string& key, const std::string& payload);

  // Returns the cached payload, or invokes `compute`, stores its result and
  // returns it.  Concurrent callers with the same key block until the first
  // caller finishes instead of recomputing.
  std::string get_or_compute(const std::string& key,
                             const std::function<std::string()>& compute);

  // Number of records currently on disk (test/diagnostic helper).
  std::size_t size() const;

 private:
  std::filesystem::path record_path(const std::string& key) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::set<std::string> in_flight_;
};

// Caption backend decorator that memoizes per-sample responses on disk.
// Cache keys cover backend id, image content, prompt, temperature and sample
// index, so distinct samples of one (image, prompt) pair are distinct records.
class CachedCaptionBackend : public CaptionBackend {
 public:
  CachedCaptionBackend(std::shared_ptr<CaptionBackend> inner,
                       std::shared_ptr<DiskCache> cache);

  std::string id() const override;
  bool provides_loglik() const override;
  CaptionSample describe_one(const ImageBuffer& image, const std::string& prompt,
                             double temperature, int sample_index) override;

 private:
  std::shared_ptr<CaptionBackend> inner_;
  std::shared_ptr<DiskCache> cache_;
};

// Embedding backend decorator that memoizes per-text embeddings on disk.
class CachedEmbeddingBackend : public EmbeddingBackend {
 public:
  CachedEmbeddingBackend(std::shared_ptr<EmbeddingBackend> inner,
                         std::shared_ptr<DiskCache> cache);

  std::string id() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  std::shared_ptr<EmbeddingBackend> inner_;
  std::shared_ptr<DiskCache> cache_;
};

}  // namespace fsum

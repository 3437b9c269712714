#include "fsum/cache.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include <json.hpp>

#include "fsum/errors.hpp"
#include "fsum/hash.hpp"
#include "fsum/image.hpp"

namespace fsum {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cache: cannot open record " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& data) {
  std::filesystem::create_directories(path.parent_path());
  // Unique temp name per thread+path so concurrent writers never collide.
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(
      std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cache: cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError("cache: short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cache: rename failed for " + path.string() + ": " + ec.message());
  }
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Canonical textual form of a temperature for key derivation: fixed six
// decimals so 0.7 and 0.70 hash identically across call sites.
std::string temp_token(double temperature) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", temperature);
  return buf;
}

}  // namespace

DiskCache::DiskCache(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path DiskCache::record_path(const std::string& key) const {
  if (key.size() < 3) throw DataError("cache: key too short: " + key);
  return root_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> DiskCache::get(const std::string& key) const {
  const auto path = record_path(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || ec) return std::nullopt;
  return read_file(path);
}

void DiskCache::put(const std::string& key, const std::string& payload) {
  write_file_atomic(record_path(key), payload);
}

std::string DiskCache::get_or_compute(const std::string& key,
                                      const std::function<std::string()>& compute) {
  {
    std::unique_lock<std::mutex> lock(mutex_);
    // Wait out any in-flight computation of the same key, then re-check disk.
    cv_.wait(lock, [&] { return in_flight_.count(key) == 0; });
    if (auto hit = get(key)) return *hit;
    in_flight_.insert(key);
  }
  try {
    std::string payload = compute();
    put(key, payload);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      in_flight_.erase(key);
    }
    cv_.notify_all();
    return payload;
  } catch (...) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      in_flight_.erase(key);
    }
    cv_.notify_all();
    throw;
  }
}

std::size_t DiskCache::size() const {
  std::size_t n = 0;
  std::error_code ec;
  for (auto it = std::filesystem::recursive_directory_iterator(root_, ec);
       !ec && it != std::filesystem::recursive_directory_iterator(); ++it) {
    if (it->is_regular_file() && it->path().extension() == ".json") ++n;
  }
  return n;
}

CachedCaptionBackend::CachedCaptionBackend(std::shared_ptr<CaptionBackend> inner,
                                           std::shared_ptr<DiskCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
  if (!inner_ || !cache_) throw ConfigError("CachedCaptionBackend: null dependency");
}

std::string CachedCaptionBackend::id() const { return inner_->id(); }

bool CachedCaptionBackend::provides_loglik() const { return inner_->provides_loglik(); }

CaptionSample CachedCaptionBackend::describe_one(const ImageBuffer& image,
                                                 const std::string& prompt,
                                                 double temperature, int sample_index) {
  const std::string key = sha256_hex(
      "caption|" + inner_->id() + "|" + image_content_hash(image) + "|" +
      sha256_hex(prompt) + "|" + temp_token(temperature) + "|" +
      std::to_string(sample_index));
  const std::string payload = cache_->get_or_compute(key, [&] {
    const CaptionSample sample = inner_->describe_one(image, prompt, temperature, sample_index);
    json record;
    record["kind"] = "caption";
    record["backend_id"] = inner_->id();
    record["text"] = sample.text;
    if (sample.sequence_loglik) record["sequence_loglik"] = *sample.sequence_loglik;
    if (sample.token_logliks) record["token_logliks"] = *sample.token_logliks;
    record["created_at"] = now_iso8601();
    return record.dump(2);
  });

  json record;
  try {
    record = json::parse(payload);
  } catch (const json::exception& e) {
    throw DataError("cache: corrupt caption record " + key + ": " + e.what());
  }
  CaptionSample sample;
  sample.text = record.at("text").get<std::string>();
  if (record.contains("sequence_loglik")) {
    sample.sequence_loglik = record["sequence_loglik"].get<double>();
  }
  if (record.contains("token_logliks")) {
    sample.token_logliks = record["token_logliks"].get<std::vector<double>>();
  }
  sample.validate();
  return sample;
}

CachedEmbeddingBackend::CachedEmbeddingBackend(std::shared_ptr<EmbeddingBackend> inner,
                                               std::shared_ptr<DiskCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
  if (!inner_ || !cache_) throw ConfigError("CachedEmbeddingBackend: null dependency");
}

std::string CachedEmbeddingBackend::id() const { return inner_->id(); }

std::vector<EmbeddingVector> CachedEmbeddingBackend::embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) throw DataError("embed: empty text batch");

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> miss_indices;
  std::vector<std::string> keys(texts.size());

  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = sha256_hex("embedding|" + inner_->id() + "|" + sha256_hex(texts[i]));
    if (auto hit = cache_->get(keys[i])) {
      json record;
      try {
        record = json::parse(*hit);
      } catch (const json::exception& e) {
        throw DataError("cache: corrupt embedding record " + keys[i] + ": " + e.what());
      }
      out[i].values = record.at("values").get<std::vector<double>>();
    } else {
      miss_indices.push_back(i);
    }
  }

  if (!miss_indices.empty()) {
    // One batched call for all misses; the inner backend sees only new texts.
    std::vector<std::string> miss_texts;
    miss_texts.reserve(miss_indices.size());
    for (std::size_t i : miss_indices) miss_texts.push_back(texts[i]);
    const std::vector<EmbeddingVector> fresh = inner_->embed(miss_texts);
    if (fresh.size() != miss_texts.size()) {
      throw MalformedResponseError("embed: backend returned " + std::to_string(fresh.size()) +
                                       " vectors for " + std::to_string(miss_texts.size()) +
                                       " texts",
                                   "");
    }
    for (std::size_t m = 0; m < miss_indices.size(); ++m) {
      const std::size_t i = miss_indices[m];
      out[i] = fresh[m];
      json record;
      record["kind"] = "embedding";
      record["backend_id"] = inner_->id();
      record["values"] = out[i].values;
      record["created_at"] = now_iso8601();
      cache_->put(keys[i], record.dump(2));
    }
  }
  return out;
}

}  // namespace fsum

#include "fsum/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "fsum/errors.hpp"

namespace fsum {
namespace {

using nlohmann::json;

}  // namespace

void Manifest::validate() const {
  if (dataset_id.empty()) throw DataError("manifest: empty dataset_id");
  if (entries.empty()) throw DataError("manifest: no entries");
  std::set<std::string> ids;
  for (const ManifestEntry& entry : entries) {
    if (entry.image_id.empty()) throw DataError("manifest: entry with empty image_id");
    if (!ids.insert(entry.image_id).second) {
      throw DataError("manifest: duplicate image_id '" + entry.image_id + "'");
    }
    if (entry.path.empty()) {
      throw DataError("manifest: entry '" + entry.image_id + "' has empty path");
    }
    if (!entry.human_references.empty() && entry.human_references.size() != 5) {
      throw DataError("manifest: entry '" + entry.image_id + "' has " +
                      std::to_string(entry.human_references.size()) +
                      " human references (must be 0 or exactly 5)");
    }
    for (const std::string& ref : entry.human_references) {
      if (ref.empty()) {
        throw DataError("manifest: entry '" + entry.image_id +
                        "' has an empty human reference");
      }
    }
  }
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("manifest: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + ": invalid JSON: " + e.what());
  }

  Manifest manifest;
  try {
    manifest.dataset_id = j.at("dataset_id").get<std::string>();
    manifest.created_at = j.value("created_at", std::string());
    for (const json& item : j.at("entries")) {
      ManifestEntry entry;
      entry.image_id = item.at("image_id").get<std::string>();
      entry.path = item.at("path").get<std::string>();
      if (item.contains("human_references") && !item["human_references"].is_null()) {
        entry.human_references =
            item["human_references"].get<std::vector<std::string>>();
      }
      manifest.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  manifest.validate();
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  manifest.validate();
  json j;
  j["dataset_id"] = manifest.dataset_id;
  j["created_at"] = manifest.created_at;
  json entries = json::array();
  for (const ManifestEntry& entry : manifest.entries) {
    json item;
    item["image_id"] = entry.image_id;
    item["path"] = entry.path;
    item["human_references"] = entry.human_references;
    entries.push_back(std::move(item));
  }
  j["entries"] = std::move(entries);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("manifest: cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw DataError("manifest: short write to " + path.string());
}

std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path,
                                         const ManifestEntry& entry) {
  const std::filesystem::path p(entry.path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace fsum

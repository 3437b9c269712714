#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fsum {

// One dataset image plus its optional five human reference captions.
struct ManifestEntry {
  std::string image_id;
  std::string path;  // as written in the manifest; resolved against its directory
  std::vector<std::string> human_references;  // size 0 or exactly 5
};

struct Manifest {
  std::string dataset_id;
  std::string created_at;  // provenance carried from the input, may be empty
  std::vector<ManifestEntry> entries;

  void validate() const;  // unique non-empty ids, non-empty paths, refs 0 or 5
};

// JSON form: {dataset_id, created_at, entries:[{image_id, path,
// human_references:[...5]}]}.  Validation runs on load and save.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Entry paths are relative to the manifest's directory unless absolute.
std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path,
                                         const ManifestEntry& entry);

}  // namespace fsum

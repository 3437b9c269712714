#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fsum/foveation.hpp"
#include "fsum/remote.hpp"

namespace fsum {

// Everything a reproducible run depends on (secrets excluded: API keys stay
// in environment variables named here, never in the file or the hash).
struct RunConfig {
  // [run]
  std::string profile = "stub";  // stub | closed | open
  std::uint64_t seed = 0;
  int workers = 1;
  std::string cache_dir = "cache";

  // [foveation]
  FoveationParams foveation{};

  // [map]
  int n_samples = 5;

  // [scoring]
  int R = 10;
  std::string bin_mode = "half-open";  // half-open | closed

  // [backends]
  double temperature = -1.0;  // < 0 -> profile default (closed/stub 1.0, open 0.7)
  int stub_embedding_dim = 64;
  std::uint64_t stub_salt = 0;
  double rate_limit_ms = 0.0;  // 0 disables the rate limiter
  RemoteBackendConfig remote{};

  // [analysis]
  int n_boot = 10000;
  std::string bootstrap_scheme = "images";  // images | participants
  double validity_threshold = 0.75;

  // [render]
  std::string colormap = "viridis";  // viridis | gray

  double effective_temperature() const;
  void validate() const;  // throws ConfigError on any out-of-range field
};

// Parses the TOML-style config text ([section] headers, key = value lines,
// '#' comments, quoted strings, numbers, booleans).  Unknown sections or
// keys are ConfigErrors so typos fail loudly.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);

// Canonical "section.key=value" lines (sorted) covering every field that
// influences results; the basis of config_hash.
std::string canonical_config_string(const RunConfig& config);

// First 16 hex chars of sha256(canonical_config_string); embedded in every
// output artifact so reruns are verifiable.
std::string config_hash(const RunConfig& config);

}  // namespace fsum

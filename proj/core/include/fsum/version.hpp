#pragma once

#include <string>

namespace fsum {

inline constexpr const char* kVersion = "0.1.0";

// Stamped into every emitted artifact (JSON keys "config_hash"/"version",
// a leading "# config_hash=... version=..." comment in CSV files) so any
// output can be traced to the exact configuration that produced it.
struct Provenance {
  std::string config_hash;
  std::string version = kVersion;
};

}  // namespace fsum

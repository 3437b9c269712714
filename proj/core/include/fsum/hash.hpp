#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fsum {

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(std::string_view s);

// First 8 bytes of SHA-256, as an integer seed.
uint64_t hash64(std::string_view s);

}  // namespace fsum

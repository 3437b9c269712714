#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fsum/image.hpp"

namespace fsum {

// Decodes a PNG or JPEG file into a float image in [0,1]. Color images come
// back as RGB, single-channel ones as grayscale.
ImageBuffer load_image(const std::filesystem::path& path);

void save_png(const ImageBuffer& image, const std::filesystem::path& path);

// In-memory PNG encoding, used for sending images to remote backends.
std::vector<uint8_t> encode_png(const ImageBuffer& image);

}  // namespace fsum

#pragma once

#include <filesystem>

#include "porogen/core/types.hpp"

namespace porogen {

/// Lossless 8-bit RGB raster in/out (PNG or TIFF by extension).
RgbImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const RgbImage& image);

/// Masks travel as single-channel PNG with {0,255} mapped to {0,1}.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace porogen

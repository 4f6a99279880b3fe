#pragma once

#include <filesystem>

#include "vpsal/raster.hpp"

namespace vpsal {

/// Reads 8/16-bit PNG or binary/ASCII PGM/PPM. Values are scaled to [0,1];
/// alpha is discarded, gray+alpha and palette images are expanded.
RasterImage load_image(const std::filesystem::path& path);

/// 16-bit export: each value is clamped to [0,1] and written as
/// round(v * 65535). Format follows the extension (.png or .pgm).
void save_map(const ScalarMap& map, const std::filesystem::path& path);

/// 8-bit export of a 1- or 3-channel image (.png, .pgm or .ppm).
void save_image(const RasterImage& img, const std::filesystem::path& path);

}  // namespace vpsal

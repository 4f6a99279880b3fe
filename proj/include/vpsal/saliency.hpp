#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vpsal/raster.hpp"

namespace vpsal {

/// Settings for the built-in center-surround baseline.
struct SaliencyConfig {
    /// Pyramid levels 0..levels-1; level 0 is the input.
    int levels = 7;
    std::vector<int> center_levels{2, 3};
    std::vector<int> surround_deltas{2, 3};
    /// Orientation filter angles in degrees.
    std::vector<double> orientations{0.0, 45.0, 90.0, 135.0};
    int min_side = 64;

    void validate() const;
};

struct SaliencyChannel {
    ScalarMap map;
    /// "builtin" or "external:<path>".
    std::string provenance;
};

/// Classical pyramid model: intensity, red-green and blue-yellow opponency
/// and oriented derivative responses, center-surround differences across
/// scales, per-map range normalization, mean of the three conspicuity maps.
/// Output has the input's dimensions and spans [0,1] (all zeros without contrast).
SaliencyChannel builtin_saliency(const RasterImage& img, const SaliencyConfig& cfg = {});

/// Reads a single-channel map, resizes it bilinearly to the target size and
/// min-max normalizes it.
SaliencyChannel load_external_map(const std::filesystem::path& path, int width, int height);

/// Same as `load_external_map` for an in-memory map.
SaliencyChannel external_channel(const ScalarMap& map, int width, int height, std::string provenance);

}  // namespace vpsal

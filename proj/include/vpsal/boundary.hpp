#pragma once

#include "vpsal/raster.hpp"

namespace vpsal {

struct BoundaryConfig {
    /// Multiplier on the mean boundary strength giving the binarization threshold.
    double threshold_multiplier = 10.0;
    /// Gaussian pre-smoothing before differentiation, in pixels.
    double smoothing_sigma = 1.0;

    void validate() const;
};

/// Boundary strength in [0,1]: smoothed Sobel gradient magnitude divided by
/// its global maximum. Stands in for a learned boundary probability.
ScalarMap boundary_map(const RasterImage& gray, const BoundaryConfig& cfg = {});

/// Threshold at `threshold_multiplier * mean(B)`. An all-zero B yields an
/// all-zero result rather than the all-ones a zero threshold would give.
BinaryMap adaptive_binarize(const ScalarMap& boundary, const BoundaryConfig& cfg = {});

}  // namespace vpsal

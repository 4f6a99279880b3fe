#pragma once

#include <vector>

#include "vpsal/raster.hpp"

namespace vpsal {

/// Fixation coordinates for one image, in working-scale pixels.
struct FixationSet {
    std::vector<Point2> points;
    /// Empty, or one id per point.
    std::vector<int> observers;

    bool empty() const noexcept { return points.empty(); }
    std::size_t size() const noexcept { return points.size(); }
};

/// Linear index of the pixel a fixation rounds to, or -1 when it rounds
/// outside a width x height grid.
long fixation_pixel(const Point2& p, int width, int height);

/// Pixels within `radius` (Euclidean, in pixels) of a rounded fixation.
/// Radius 0 marks exactly the rounded pixel.
BinaryMap fixation_mask(const FixationSet& fix, int width, int height, int radius = 0);

}  // namespace vpsal

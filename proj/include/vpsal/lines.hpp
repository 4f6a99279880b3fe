#pragma once

#include <vector>

#include "vpsal/raster.hpp"

namespace vpsal {

struct HoughParams {
    /// Angular bins over [0, pi); 180 gives 1 degree steps covering every direction.
    int theta_bins = 180;
    /// Minimum number of supporting pixels for a line.
    int vote_threshold = 60;
    double rho_resolution = 1.0;

    void validate() const;
};

struct PixelCoord {
    int x = 0;
    int y = 0;

    auto operator<=>(const PixelCoord&) const = default;
};

/// Line in normal form x*cos(theta) + y*sin(theta) = rho.
struct DetectedLine {
    double theta = 0.0;
    double rho = 0.0;
    int votes = 0;
    int theta_bin = 0;
    int rho_bin = 0;
    std::vector<PixelCoord> inlier_pixels;
};

struct IntersectionPoint {
    double x = 0.0;
    double y = 0.0;
    int line_a = 0;
    int line_b = 0;
};

/// Standard (rho, theta) accumulator. Peaks are strict 8-neighbour local
/// maxima (equal neighbours resolved toward the smaller (theta, rho) bin
/// index) with votes >= vote_threshold, sorted by votes descending.
std::vector<DetectedLine> hough_lines(const BinaryMap& edges, const HoughParams& params = {});

/// Rasterizes the union of the lines' inlier pixels.
BinaryMap line_map(const std::vector<DetectedLine>& lines, int width, int height);

/// Pairwise intersections of the lines extended to infinity, kept only when
/// strictly inside [0,width) x [0,height). Near-parallel pairs are skipped.
std::vector<IntersectionPoint> intersections(const std::vector<DetectedLine>& lines, int width, int height);

/// Draws lines (clipped to the image) onto an RGB copy of `img` for inspection.
RasterImage overlay_lines(const RasterImage& img, const std::vector<DetectedLine>& lines);

}  // namespace vpsal

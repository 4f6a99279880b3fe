#include "vpsal/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vpsal {

void BoundaryConfig::validate() const {
    if (!(threshold_multiplier > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "threshold_multiplier must be > 0");
    }
    if (!(smoothing_sigma >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "smoothing_sigma must be >= 0");
    }
}

ScalarMap boundary_map(const RasterImage& gray, const BoundaryConfig& cfg) {
    cfg.validate();
    if (gray.channels() != 1) {
        throw Error(ErrorCode::InvalidArgument, "boundary_map expects a single-channel image");
    }
    const ScalarMap smooth = gaussian_blur(gray.channel(0), cfg.smoothing_sigma);
    const int w = smooth.width();
    const int h = smooth.height();
    auto px = [&](int x, int y) { return smooth(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };

    ScalarMap mag(w, h);
    double peak = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Sobel
            const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            const double m = std::sqrt(gx * gx + gy * gy);
            mag(x, y) = m;
            peak = std::max(peak, m);
        }
    }
    if (peak <= 0.0) {
        return ScalarMap(w, h, 0.0);
    }
    for (double& v : mag.values()) {
        v /= peak;
    }
    return mag;
}

BinaryMap adaptive_binarize(const ScalarMap& boundary, const BoundaryConfig& cfg) {
    cfg.validate();
    BinaryMap out(boundary.width(), boundary.height(), 0);
    if (boundary.empty()) {
        return out;
    }
    const double mean =
        std::accumulate(boundary.values().begin(), boundary.values().end(), 0.0) / static_cast<double>(boundary.size());
    if (mean <= 0.0) {
        return out;
    }
    const double t = cfg.threshold_multiplier * mean;
    auto src = boundary.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] >= t ? 1 : 0;
    }
    return out;
}

}  // namespace vpsal

#include "vpsal/fixations.hpp"

#include <cmath>

namespace vpsal {

long fixation_pixel(const Point2& p, int width, int height) {
    const long x = std::lround(p.x);
    const long y = std::lround(p.y);
    if (x < 0 || y < 0 || x >= width || y >= height) {
        return -1;
    }
    return y * width + x;
}

BinaryMap fixation_mask(const FixationSet& fix, int width, int height, int radius) {
    if (radius < 0) {
        throw Error(ErrorCode::InvalidArgument, "fixation radius must be >= 0");
    }
    BinaryMap mask(width, height, 0);
    for (const auto& p : fix.points) {
        const long cx = std::lround(p.x);
        const long cy = std::lround(p.y);
        for (long dy = -radius; dy <= radius; ++dy) {
            for (long dx = -radius; dx <= radius; ++dx) {
                if (dx * dx + dy * dy > static_cast<long>(radius) * radius) {
                    continue;
                }
                const long x = cx + dx;
                const long y = cy + dy;
                if (x >= 0 && y >= 0 && x < width && y < height) {
                    mask(static_cast<int>(x), static_cast<int>(y)) = 1;
                }
            }
        }
    }
    return mask;
}

}  // namespace vpsal

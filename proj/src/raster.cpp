#include "vpsal/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vpsal {

RasterImage::RasterImage(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0) {
        throw Error(ErrorCode::InvalidArgument, "negative image dimensions");
    }
    if (channels != 1 && channels != 3) {
        throw Error(ErrorCode::InvalidArgument, "images must have 1 or 3 channels, got " + std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(channels),
                 fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<double> data)
    : RasterImage(width, height, channels) {
    if (data.size() != data_.size()) {
        throw Error(ErrorCode::InvalidArgument, "image data length does not match dimensions");
    }
    data_ = std::move(data);
}

ScalarMap RasterImage::channel(int c) const {
    ScalarMap out(width_, height_);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            out(x, y) = at(x, y, c);
        }
    }
    return out;
}

RasterImage to_grayscale(const RasterImage& img, const GrayWeights& weights) {
    if (img.channels() == 1) {
        return img;
    }
    RasterImage out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.at(x, y) = weights.r * img.at(x, y, 0) + weights.g * img.at(x, y, 1) + weights.b * img.at(x, y, 2);
        }
    }
    return out;
}

RasterImage image_from_map(const ScalarMap& map) {
    RasterImage out(map.width(), map.height(), 1);
    auto src = map.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = std::clamp(src[i], 0.0, 1.0);
    }
    return out;
}

namespace {

struct Tap {
    int i0;
    int i1;
    double w1;
};

// Half-pixel-center mapping, clamped to the source extent.
std::vector<Tap> bilinear_taps(int src, int dst) {
    std::vector<Tap> taps(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (int d = 0; d < dst; ++d) {
        double s = (d + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(src - 1));
        int i0 = static_cast<int>(std::floor(s));
        int i1 = std::min(i0 + 1, src - 1);
        taps[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
    }
    return taps;
}

}  // namespace

ScalarMap resize_bilinear(const ScalarMap& map, int width, int height) {
    if (width < 1 || height < 1 || map.empty()) {
        throw Error(ErrorCode::InvalidArgument, "resize to empty dimensions");
    }
    if (width == map.width() && height == map.height()) {
        return map;
    }
    const auto tx = bilinear_taps(map.width(), width);
    const auto ty = bilinear_taps(map.height(), height);
    ScalarMap out(width, height);
    for (int y = 0; y < height; ++y) {
        const Tap& a = ty[static_cast<std::size_t>(y)];
        for (int x = 0; x < width; ++x) {
            const Tap& b = tx[static_cast<std::size_t>(x)];
            double top = map(b.i0, a.i0) + b.w1 * (map(b.i1, a.i0) - map(b.i0, a.i0));
            double bot = map(b.i0, a.i1) + b.w1 * (map(b.i1, a.i1) - map(b.i0, a.i1));
            double v = (1.0 - a.w1) * top + a.w1 * bot;
            out(x, y) = v;
        }
    }
    return out;
}

RasterImage resize_bilinear(const RasterImage& img, int width, int height) {
    if (width == img.width() && height == img.height()) {
        return img;
    }
    RasterImage out(width, height, img.channels());
    for (int c = 0; c < img.channels(); ++c) {
        ScalarMap plane = resize_bilinear(img.channel(c), width, height);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                out.at(x, y, c) = std::clamp(plane(x, y), 0.0, 1.0);
            }
        }
    }
    return out;
}

std::pair<int, int> max_side_dims(int width, int height, int target) {
    if (target < 1) {
        throw Error(ErrorCode::InvalidArgument, "resize target must be >= 1");
    }
    if (width >= height) {
        int h = static_cast<int>(std::lround(static_cast<double>(height) * target / width));
        return {target, std::max(1, h)};
    }
    int w = static_cast<int>(std::lround(static_cast<double>(width) * target / height));
    return {std::max(1, w), target};
}

RasterImage resize_max_side(const RasterImage& img, int target) {
    auto [w, h] = max_side_dims(img.width(), img.height(), target);
    return resize_bilinear(img, w, h);
}

namespace {

template <typename Fn>
bool span_is_flat(Fn&& value_at, int count, int channels, double tolerance) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < count; ++i) {
        for (int c = 0; c < channels; ++c) {
            double v = value_at(i, c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    // Some constant lies within `tolerance` of every value iff half the range fits.
    return (hi - lo) <= 2.0 * tolerance + 1e-12;
}

}  // namespace

RasterImage crop(const RasterImage& img, int x0, int y0, int width, int height) {
    if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > img.width() || y0 + height > img.height()) {
        throw Error(ErrorCode::InvalidArgument, "crop window outside image");
    }
    RasterImage out(width, height, img.channels());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
            }
        }
    }
    return out;
}

ScalarMap crop(const ScalarMap& map, int x0, int y0, int width, int height) {
    if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > map.width() || y0 + height > map.height()) {
        throw Error(ErrorCode::InvalidArgument, "crop window outside map");
    }
    ScalarMap out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            out(x, y) = map(x0 + x, y0 + y);
        }
    }
    return out;
}

Crop crop_gray_margins(const RasterImage& img, double tolerance) {
    const int ch = img.channels();
    int top = 0;
    int bottom = img.height();
    int left = 0;
    int right = img.width();

    auto row_flat = [&](int y) {
        return span_is_flat([&](int i, int c) { return img.at(left + i, y, c); }, right - left, ch, tolerance);
    };
    auto col_flat = [&](int x) {
        return span_is_flat([&](int i, int c) { return img.at(x, top + i, c); }, bottom - top, ch, tolerance);
    };

    bool changed = true;
    while (changed && top < bottom && left < right) {
        changed = false;
        if (top < bottom && row_flat(top)) {
            ++top;
            changed = true;
        }
        if (top < bottom && row_flat(bottom - 1)) {
            --bottom;
            changed = true;
        }
        if (top < bottom && left < right && col_flat(left)) {
            ++left;
            changed = true;
        }
        if (top < bottom && left < right && col_flat(right - 1)) {
            --right;
            changed = true;
        }
    }
    if (top >= bottom || left >= right) {
        throw Error(ErrorCode::Degenerate, "degenerate: image is all margin");
    }
    return {crop(img, left, top, right - left, bottom - top), left, top};
}

ScalarMap normalize_minmax(const ScalarMap& map) {
    ScalarMap out(map.width(), map.height(), 0.0);
    if (map.empty()) {
        return out;
    }
    auto [lo_it, hi_it] = std::minmax_element(map.values().begin(), map.values().end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (!(range > 0.0)) {
        return out;
    }
    auto src = map.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = (src[i] - lo) / range;
    }
    return out;
}

namespace {

std::vector<double> gaussian_kernel(double sigma, double truncate) {
    const int radius = std::max(1, static_cast<int>(std::ceil(truncate * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) {
        v /= sum;
    }
    return k;
}

}  // namespace

ScalarMap gaussian_blur(const ScalarMap& map, double sigma, double truncate, Border border) {
    if (sigma < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "blur sigma must be >= 0");
    }
    if (sigma == 0.0 || map.empty()) {
        return map;
    }
    const auto k = gaussian_kernel(sigma, truncate);
    const int r = static_cast<int>(k.size() / 2);
    const int w = map.width();
    const int h = map.height();

    ScalarMap tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                int xx = x + i;
                if (xx < 0 || xx >= w) {
                    if (border == Border::Zero) {
                        continue;
                    }
                    xx = std::clamp(xx, 0, w - 1);
                }
                acc += k[static_cast<std::size_t>(i + r)] * map(xx, y);
            }
            tmp(x, y) = acc;
        }
    }
    ScalarMap out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                int yy = y + i;
                if (yy < 0 || yy >= h) {
                    if (border == Border::Zero) {
                        continue;
                    }
                    yy = std::clamp(yy, 0, h - 1);
                }
                acc += k[static_cast<std::size_t>(i + r)] * tmp(x, yy);
            }
            out(x, y) = acc;
        }
    }
    return out;
}

double sample_bilinear(const ScalarMap& map, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(map.width() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(map.height() - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, map.width() - 1);
    const int y1 = std::min(y0 + 1, map.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    // Exact lookup on integer coordinates keeps pixel-centered sampling bit-exact.
    if (fx == 0.0 && fy == 0.0) {
        return map(x0, y0);
    }
    const double top = (1.0 - fx) * map(x0, y0) + fx * map(x1, y0);
    const double bot = (1.0 - fx) * map(x0, y1) + fx * map(x1, y1);
    return (1.0 - fy) * top + fy * bot;
}

}  // namespace vpsal

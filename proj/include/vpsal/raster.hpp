#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vpsal/error.hpp"

namespace vpsal {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Row-major single-channel grid. Pixel (x, y) has its center at integer
/// coordinates, so the valid continuous range is [-0.5, width - 0.5).
template <typename T>
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, T fill = T{}) : width_(width), height_(height) {
        if (width < 0 || height < 0) {
            throw Error(ErrorCode::InvalidArgument, "negative plane dimensions");
        }
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }
    Plane(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw Error(ErrorCode::InvalidArgument, "plane data length does not match dimensions");
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }
    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    bool operator==(const Plane&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using ScalarMap = Plane<double>;
using BinaryMap = Plane<std::uint8_t>;

/// Interleaved image with 1 or 3 channels, values in [0,1].
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, double fill = 0.0);
    RasterImage(int width, int height, int channels, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }

    double& at(int x, int y, int c = 0) { return data_[offset(x, y, c)]; }
    double at(int x, int y, int c = 0) const { return data_[offset(x, y, c)]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    /// Channel `c` copied out as a plane.
    ScalarMap channel(int c) const;

    bool operator==(const RasterImage&) const = default;

private:
    std::size_t offset(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<double> data_;
};

struct GrayWeights {
    double r = 0.299;
    double g = 0.587;
    double b = 0.114;
};

RasterImage to_grayscale(const RasterImage& img, const GrayWeights& weights = {});

/// Single-channel image from a map; values are clamped to [0,1].
RasterImage image_from_map(const ScalarMap& map);

/// Bilinear resampling with half-pixel-center alignment. Every output value
/// is a convex combination of input values.
ScalarMap resize_bilinear(const ScalarMap& map, int width, int height);
RasterImage resize_bilinear(const RasterImage& img, int width, int height);

/// Output dimensions for scaling the longest side to `target`.
std::pair<int, int> max_side_dims(int width, int height, int target);

RasterImage resize_max_side(const RasterImage& img, int target = 400);

struct Crop {
    RasterImage image;
    int offset_x = 0;
    int offset_y = 0;
};

/// Strips border rows/columns whose values all lie within `tolerance` of a
/// single constant. Throws Degenerate when nothing is left.
Crop crop_gray_margins(const RasterImage& img, double tolerance = 2.0 / 255.0);

RasterImage crop(const RasterImage& img, int x0, int y0, int width, int height);
ScalarMap crop(const ScalarMap& map, int x0, int y0, int width, int height);

/// Affine rescale to [0,1]. A constant map becomes all zeros.
ScalarMap normalize_minmax(const ScalarMap& map);

enum class Border { Replicate, Zero };

/// Separable Gaussian filter truncated at `truncate` standard deviations.
/// sigma == 0 returns the input unchanged.
ScalarMap gaussian_blur(const ScalarMap& map, double sigma, double truncate = 3.0, Border border = Border::Replicate);

/// Bilinear sample at continuous pixel coordinates (edge-clamped).
double sample_bilinear(const ScalarMap& map, double x, double y);

}  // namespace vpsal

#include "vpsal/vpdetect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>
#include <unordered_map>

namespace vpsal {

void VpChannelConfig::validate() const {
    if (!(sigma_vp > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sigma_vp must be > 0");
    }
    if (!(neighbor_radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "neighbor_radius must be > 0");
    }
}

namespace {

bool yx_less(const Point2& a, const Point2& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); }

std::int64_t cell_key(std::int64_t cx, std::int64_t cy) { return (cx << 32) ^ (cy & 0xffffffff); }

}  // namespace

Cluster neighbor_cluster(const std::vector<IntersectionPoint>& points, double radius) {
    if (points.empty()) {
        throw Error(ErrorCode::NoVanishingPoint, "no VP found: no intersections to cluster");
    }
    if (!(radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "cluster radius must be > 0");
    }
    const double r2 = radius * radius;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
    auto cell_of = [&](const IntersectionPoint& p) {
        return std::pair<std::int64_t, std::int64_t>{static_cast<std::int64_t>(std::floor(p.x / radius)),
                                                     static_cast<std::int64_t>(std::floor(p.y / radius))};
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [cx, cy] = cell_of(points[i]);
        grid[cell_key(cx, cy)].push_back(i);
    }

    auto for_each_neighbour = [&](std::size_t i, auto&& fn) {
        const auto& p = points[i];
        auto [cx, cy] = cell_of(p);
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                auto it = grid.find(cell_key(cx + dx, cy + dy));
                if (it == grid.end()) {
                    continue;
                }
                for (std::size_t j : it->second) {
                    if (j == i) {
                        continue;
                    }
                    const double ddx = points[j].x - p.x;
                    const double ddy = points[j].y - p.y;
                    if (ddx * ddx + ddy * ddy < r2) {
                        fn(j);
                    }
                }
            }
        }
    };

    std::size_t best = 0;
    int best_count = -1;
    for (std::size_t i = 0; i < points.size(); ++i) {
        int count = 0;
        for_each_neighbour(i, [&](std::size_t) { ++count; });
        const Point2 pi{points[i].x, points[i].y};
        const Point2 pb{points[best].x, points[best].y};
        if (count > best_count || (count == best_count && yx_less(pi, pb))) {
            best = i;
            best_count = count;
        }
    }

    Cluster cluster;
    cluster.seed = {points[best].x, points[best].y};
    cluster.members.push_back(cluster.seed);
    for_each_neighbour(best, [&](std::size_t j) { cluster.members.push_back({points[j].x, points[j].y}); });
    std::sort(cluster.members.begin(), cluster.members.end(), yx_less);
    return cluster;
}

VpEstimate detect_vp(const RasterImage& img, const BoundaryConfig& bcfg, const HoughParams& hp,
                     const VpChannelConfig& vcfg, DetectionTrace* trace) {
    vcfg.validate();
    const RasterImage gray = to_grayscale(img);
    ScalarMap boundary = boundary_map(gray, bcfg);
    BinaryMap binary = adaptive_binarize(boundary, bcfg);
    std::vector<DetectedLine> lines = hough_lines(binary, hp);
    std::vector<IntersectionPoint> points = intersections(lines, img.width(), img.height());

    const std::size_t n_lines = lines.size();
    const bool no_points = points.empty();
    if (trace != nullptr) {
        *trace = {std::move(boundary), std::move(binary), std::move(lines), points};
    }
    if (n_lines < 2) {
        throw Error(ErrorCode::NoVanishingPoint, "no VP found: fewer than two lines detected");
    }
    if (no_points) {
        throw Error(ErrorCode::NoVanishingPoint, "no VP found: no line intersection inside the image");
    }

    Cluster cluster = neighbor_cluster(points, vcfg.neighbor_radius);
    VpEstimate est;
    est.seed = cluster.seed;
    est.support = static_cast<int>(cluster.members.size());
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& m : cluster.members) {
        sx += m.x;
        sy += m.y;
    }
    est.location = {sx / est.support, sy / est.support};
    est.members = std::move(cluster.members);
    return est;
}

double gaussian_value(double dx, double dy, double sigma, GaussianForm form) {
    const double k = form == GaussianForm::FourSigmaSq ? 4.0 : 2.0;
    const double s2 = sigma * sigma;
    return std::exp(-(dx * dx + dy * dy) / (k * s2)) / (2.0 * std::numbers::pi * s2);
}

ScalarMap vp_gaussian_raw(int width, int height, Point2 center, double sigma, GaussianForm form) {
    if (!(sigma > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "Gaussian sigma must be > 0");
    }
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "Gaussian map needs positive dimensions");
    }
    ScalarMap out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            out(x, y) = gaussian_value(x - center.x, y - center.y, sigma, form);
        }
    }
    return out;
}

ScalarMap vp_gaussian(int width, int height, Point2 center, double sigma, GaussianForm form) {
    if (!(center.x >= -0.5 && center.y >= -0.5 && center.x <= width - 0.5 && center.y <= height - 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "Gaussian center outside the image");
    }
    return normalize_minmax(vp_gaussian_raw(width, height, center, sigma, form));
}

Point2 image_center(int width, int height) { return {(width - 1) / 2.0, (height - 1) / 2.0}; }

ScalarMap center_gaussian(int width, int height, double sigma_cg, GaussianForm form) {
    return vp_gaussian(width, height, image_center(width, height), sigma_cg, form);
}

double detector_error(Point2 est, Point2 truth) { return std::hypot(est.x - truth.x, est.y - truth.y); }

double detector_error(const VpEstimate& est, const Annotation& ann) {
    return detector_error(est.location, ann.vp_center);
}

std::vector<int> error_histogram(const std::vector<double>& errors, double bin_width) {
    if (!(bin_width > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "histogram bin width must be > 0");
    }
    std::vector<int> bins;
    for (double e : errors) {
        if (!(e >= 0.0) || !std::isfinite(e)) {
            throw Error(ErrorCode::InvalidArgument, "detector errors must be finite and non-negative");
        }
        const auto k = static_cast<std::size_t>(std::floor(e / bin_width));
        if (bins.size() <= k) {
            bins.resize(k + 1, 0);
        }
        ++bins[k];
    }
    return bins;
}

std::string to_string(AnnotationSource source) { return source == AnnotationSource::Human ? "human" : "detector"; }

}  // namespace vpsal

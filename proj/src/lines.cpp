#include "vpsal/lines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace vpsal {

void HoughParams::validate() const {
    if (theta_bins < 1) {
        throw Error(ErrorCode::InvalidArgument, "theta_bins must be >= 1");
    }
    if (vote_threshold < 1) {
        throw Error(ErrorCode::InvalidArgument, "vote_threshold must be >= 1");
    }
    if (!(rho_resolution > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "rho_resolution must be > 0");
    }
}

namespace {

class Accumulator {
public:
    Accumulator(int width, int height, const HoughParams& p) : params_(p) {
        const double diag = std::hypot(std::max(0, width - 1), std::max(0, height - 1));
        offset_ = static_cast<int>(std::ceil(diag / p.rho_resolution)) + 1;
        rho_bins_ = 2 * offset_ + 1;
        cos_.resize(static_cast<std::size_t>(p.theta_bins));
        sin_.resize(static_cast<std::size_t>(p.theta_bins));
        for (int t = 0; t < p.theta_bins; ++t) {
            const double th = theta(t);
            cos_[static_cast<std::size_t>(t)] = std::cos(th);
            sin_[static_cast<std::size_t>(t)] = std::sin(th);
        }
        votes_.assign(static_cast<std::size_t>(p.theta_bins) * static_cast<std::size_t>(rho_bins_), 0);
    }

    double theta(int t) const { return std::numbers::pi * t / params_.theta_bins; }
    double rho(int r) const { return (r - offset_) * params_.rho_resolution; }

    int rho_bin(int t, int x, int y) const {
        const double v = x * cos_[static_cast<std::size_t>(t)] + y * sin_[static_cast<std::size_t>(t)];
        return static_cast<int>(std::lround(v / params_.rho_resolution)) + offset_;
    }

    void vote(int x, int y) {
        for (int t = 0; t < params_.theta_bins; ++t) {
            ++votes_[cell(t, rho_bin(t, x, y))];
        }
    }

    int at(int t, int r) const { return votes_[cell(t, r)]; }

    // Neighbour lookup across the theta wrap: (theta - pi, rho) == (theta, -rho).
    bool neighbour(int t, int r, int& nt, int& nr) const {
        nt = t;
        nr = r;
        if (t < 0) {
            nt = params_.theta_bins - 1;
            nr = 2 * offset_ - r;
        } else if (t >= params_.theta_bins) {
            nt = 0;
            nr = 2 * offset_ - r;
        }
        return nr >= 0 && nr < rho_bins_;
    }

    bool is_peak(int t, int r) const {
        const int v = at(t, r);
        for (int dt = -1; dt <= 1; ++dt) {
            for (int dr = -1; dr <= 1; ++dr) {
                if (dt == 0 && dr == 0) {
                    continue;
                }
                int nt = 0;
                int nr = 0;
                if (!neighbour(t + dt, r + dr, nt, nr)) {
                    continue;
                }
                if (nt == t && nr == r) {
                    continue;
                }
                const int nv = at(nt, nr);
                if (nv > v || (nv == v && std::tie(nt, nr) < std::tie(t, r))) {
                    return false;
                }
            }
        }
        return true;
    }

    int theta_bins() const { return params_.theta_bins; }
    int rho_bins() const { return rho_bins_; }

private:
    std::size_t cell(int t, int r) const {
        return static_cast<std::size_t>(t) * static_cast<std::size_t>(rho_bins_) + static_cast<std::size_t>(r);
    }

    HoughParams params_;
    int offset_ = 0;
    int rho_bins_ = 0;
    std::vector<double> cos_;
    std::vector<double> sin_;
    std::vector<int> votes_;
};

}  // namespace

std::vector<DetectedLine> hough_lines(const BinaryMap& edges, const HoughParams& params) {
    params.validate();
    std::vector<DetectedLine> lines;
    std::vector<PixelCoord> on;
    for (int y = 0; y < edges.height(); ++y) {
        for (int x = 0; x < edges.width(); ++x) {
            if (edges(x, y) != 0) {
                on.push_back({x, y});
            }
        }
    }
    if (static_cast<int>(on.size()) < params.vote_threshold) {
        return lines;
    }

    Accumulator acc(edges.width(), edges.height(), params);
    for (const auto& p : on) {
        acc.vote(p.x, p.y);
    }

    for (int t = 0; t < acc.theta_bins(); ++t) {
        for (int r = 0; r < acc.rho_bins(); ++r) {
            if (acc.at(t, r) >= params.vote_threshold && acc.is_peak(t, r)) {
                DetectedLine line;
                line.theta = acc.theta(t);
                line.rho = acc.rho(r);
                line.votes = acc.at(t, r);
                line.theta_bin = t;
                line.rho_bin = r;
                lines.push_back(std::move(line));
            }
        }
    }
    std::sort(lines.begin(), lines.end(), [](const DetectedLine& a, const DetectedLine& b) {
        return std::make_tuple(-a.votes, a.theta_bin, a.rho_bin) < std::make_tuple(-b.votes, b.theta_bin, b.rho_bin);
    });

    for (auto& line : lines) {
        line.inlier_pixels.reserve(static_cast<std::size_t>(line.votes));
        for (const auto& p : on) {
            if (acc.rho_bin(line.theta_bin, p.x, p.y) == line.rho_bin) {
                line.inlier_pixels.push_back(p);
            }
        }
    }
    return lines;
}

BinaryMap line_map(const std::vector<DetectedLine>& lines, int width, int height) {
    BinaryMap out(width, height, 0);
    for (const auto& line : lines) {
        for (const auto& p : line.inlier_pixels) {
            if (out.contains(p.x, p.y)) {
                out(p.x, p.y) = 1;
            }
        }
    }
    return out;
}

std::vector<IntersectionPoint> intersections(const std::vector<DetectedLine>& lines, int width, int height) {
    std::vector<IntersectionPoint> out;
    const int n = static_cast<int>(lines.size());
    for (int a = 0; a < n; ++a) {
        const double ca = std::cos(lines[static_cast<std::size_t>(a)].theta);
        const double sa = std::sin(lines[static_cast<std::size_t>(a)].theta);
        const double ra = lines[static_cast<std::size_t>(a)].rho;
        for (int b = a + 1; b < n; ++b) {
            const double cb = std::cos(lines[static_cast<std::size_t>(b)].theta);
            const double sb = std::sin(lines[static_cast<std::size_t>(b)].theta);
            const double rb = lines[static_cast<std::size_t>(b)].rho;
            // det = sin(theta_b - theta_a)
            const double det = ca * sb - sa * cb;
            if (std::abs(det) < 1e-6) {
                continue;
            }
            const double x = (ra * sb - rb * sa) / det;
            const double y = (ca * rb - cb * ra) / det;
            if (x >= 0.0 && y >= 0.0 && x < width && y < height) {
                out.push_back({x, y, a, b});
            }
        }
    }
    return out;
}

RasterImage overlay_lines(const RasterImage& img, const std::vector<DetectedLine>& lines) {
    RasterImage out(img.width(), img.height(), 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = img.channels() == 3 ? img.at(x, y, c) : img.at(x, y, 0);
            }
        }
    }
    auto paint = [&](int x, int y) {
        if (x >= 0 && y >= 0 && x < out.width() && y < out.height()) {
            out.at(x, y, 0) = 1.0;
            out.at(x, y, 1) = 0.0;
            out.at(x, y, 2) = 0.0;
        }
    };
    for (const auto& line : lines) {
        const double c = std::cos(line.theta);
        const double s = std::sin(line.theta);
        if (std::abs(s) > std::abs(c)) {
            for (int x = 0; x < out.width(); ++x) {
                paint(x, static_cast<int>(std::lround((line.rho - x * c) / s)));
            }
        } else {
            for (int y = 0; y < out.height(); ++y) {
                paint(static_cast<int>(std::lround((line.rho - y * s) / c)), y);
            }
        }
    }
    return out;
}

}  // namespace vpsal

#include "vpsal/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vpsal/image_io.hpp"

namespace vpsal {

void SaliencyConfig::validate() const {
    if (levels < 2) {
        throw Error(ErrorCode::InvalidArgument, "saliency pyramid needs at least two levels");
    }
    for (int c : center_levels) {
        for (int d : surround_deltas) {
            if (c < 0 || d < 1 || c + d >= levels) {
                throw Error(ErrorCode::InvalidArgument, "center/surround levels exceed the pyramid depth");
            }
        }
    }
    if (center_levels.empty() || surround_deltas.empty() || orientations.empty()) {
        throw Error(ErrorCode::InvalidArgument, "saliency config needs centers, deltas and orientations");
    }
}

namespace {

// Maps whose peak is below this are treated as carrying no contrast.
constexpr double kFlat = 1e-9;

using Pyramid = std::vector<ScalarMap>;

ScalarMap blur5(const ScalarMap& in) {
    static constexpr double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    const int w = in.width();
    const int h = in.height();
    ScalarMap tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -2; i <= 2; ++i) {
                acc += k[i + 2] * in(std::clamp(x + i, 0, w - 1), y);
            }
            tmp(x, y) = acc;
        }
    }
    ScalarMap out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -2; i <= 2; ++i) {
                acc += k[i + 2] * tmp(x, std::clamp(y + i, 0, h - 1));
            }
            out(x, y) = acc;
        }
    }
    return out;
}

// Blur, then average 2x2 blocks (trailing odd row/column dropped).
ScalarMap reduce(const ScalarMap& in) {
    const ScalarMap b = blur5(in);
    const int w = std::max(1, in.width() / 2);
    const int h = std::max(1, in.height() / 2);
    ScalarMap out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int x0 = std::min(2 * x, b.width() - 1);
            const int y0 = std::min(2 * y, b.height() - 1);
            const int x1 = std::min(x0 + 1, b.width() - 1);
            const int y1 = std::min(y0 + 1, b.height() - 1);
            out(x, y) = 0.25 * (b(x0, y0) + b(x1, y0) + b(x0, y1) + b(x1, y1));
        }
    }
    return out;
}

Pyramid build_pyramid(ScalarMap base, int levels) {
    Pyramid p;
    p.reserve(static_cast<std::size_t>(levels));
    p.push_back(std::move(base));
    for (int l = 1; l < levels; ++l) {
        p.push_back(reduce(p.back()));
    }
    return p;
}

ScalarMap range_normalize(const ScalarMap& m) {
    double hi = 0.0;
    for (double v : m.values()) {
        hi = std::max(hi, std::abs(v));
    }
    if (hi < kFlat) {
        return ScalarMap(m.width(), m.height(), 0.0);
    }
    return normalize_minmax(m);
}

ScalarMap oriented_response(const ScalarMap& level, double degrees) {
    const double c = std::cos(degrees * std::numbers::pi / 180.0);
    const double s = std::sin(degrees * std::numbers::pi / 180.0);
    const int w = level.width();
    const int h = level.height();
    ScalarMap out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = 0.5 * (level(std::min(x + 1, w - 1), y) - level(std::max(x - 1, 0), y));
            const double gy = 0.5 * (level(x, std::min(y + 1, h - 1)) - level(x, std::max(y - 1, 0)));
            out(x, y) = std::abs(c * gx + s * gy);
        }
    }
    return out;
}

void accumulate(ScalarMap& acc, const ScalarMap& term) {
    const ScalarMap sized =
        term.width() == acc.width() && term.height() == acc.height() ? term : resize_bilinear(term, acc.width(), acc.height());
    auto dst = acc.values();
    auto src = sized.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
}

// Sum of normalized |center - surround| maps, at the finest center level.
ScalarMap center_surround(const Pyramid& p, const SaliencyConfig& cfg, int out_level) {
    ScalarMap acc(p[static_cast<std::size_t>(out_level)].width(), p[static_cast<std::size_t>(out_level)].height(), 0.0);
    for (int c : cfg.center_levels) {
        const ScalarMap& center = p[static_cast<std::size_t>(c)];
        for (int d : cfg.surround_deltas) {
            const ScalarMap surround = resize_bilinear(p[static_cast<std::size_t>(c + d)], center.width(), center.height());
            ScalarMap diff(center.width(), center.height());
            for (std::size_t i = 0; i < diff.size(); ++i) {
                diff.values()[i] = std::abs(center.values()[i] - surround.values()[i]);
            }
            accumulate(acc, range_normalize(diff));
        }
    }
    return acc;
}

}  // namespace

SaliencyChannel builtin_saliency(const RasterImage& img, const SaliencyConfig& cfg) {
    cfg.validate();
    if (img.width() < cfg.min_side || img.height() < cfg.min_side) {
        throw Error(ErrorCode::InvalidArgument, "image smaller than " + std::to_string(cfg.min_side) +
                                                    " px on a side; pyramid depth unsupported");
    }
    const int w = img.width();
    const int h = img.height();
    ScalarMap intensity(w, h);
    ScalarMap rg(w, h);
    ScalarMap by(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double r = img.at(x, y, 0);
            const double g = img.channels() == 3 ? img.at(x, y, 1) : r;
            const double b = img.channels() == 3 ? img.at(x, y, 2) : r;
            intensity(x, y) = (r + g + b) / 3.0;
            rg(x, y) = r - g;
            by(x, y) = b - 0.5 * (r + g);
        }
    }

    const int out_level = *std::min_element(cfg.center_levels.begin(), cfg.center_levels.end());
    const Pyramid pi = build_pyramid(std::move(intensity), cfg.levels);
    const Pyramid prg = build_pyramid(std::move(rg), cfg.levels);
    const Pyramid pby = build_pyramid(std::move(by), cfg.levels);

    const ScalarMap cons_i = range_normalize(center_surround(pi, cfg, out_level));

    ScalarMap color = center_surround(prg, cfg, out_level);
    accumulate(color, center_surround(pby, cfg, out_level));
    const ScalarMap cons_c = range_normalize(color);

    ScalarMap orient(cons_i.width(), cons_i.height(), 0.0);
    for (double deg : cfg.orientations) {
        Pyramid po;
        po.reserve(pi.size());
        for (const auto& level : pi) {
            po.push_back(oriented_response(level, deg));
        }
        accumulate(orient, center_surround(po, cfg, out_level));
    }
    const ScalarMap cons_o = range_normalize(orient);

    ScalarMap combined(cons_i.width(), cons_i.height());
    for (std::size_t i = 0; i < combined.size(); ++i) {
        combined.values()[i] = (cons_i.values()[i] + cons_c.values()[i] + cons_o.values()[i]) / 3.0;
    }
    ScalarMap full = resize_bilinear(range_normalize(combined), w, h);
    return {range_normalize(full), "builtin"};
}

SaliencyChannel external_channel(const ScalarMap& map, int width, int height, std::string provenance) {
    return {normalize_minmax(resize_bilinear(map, width, height)), std::move(provenance)};
}

SaliencyChannel load_external_map(const std::filesystem::path& path, int width, int height) {
    const RasterImage img = load_image(path);
    if (img.channels() != 1) {
        throw Error(ErrorCode::Format, "external saliency maps must be single-channel: " + path.string());
    }
    return external_channel(img.channel(0), width, height, "external:" + path.string());
}

}  // namespace vpsal

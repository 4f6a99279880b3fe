#include "vpsal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace vpsal {

ScalarMap density_map(const FixationSet& fix, int width, int height, double sigma_fix) {
    if (fix.empty()) {
        throw Error(ErrorCode::InvalidArgument, "density map needs at least one fixation");
    }
    if (!(sigma_fix > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sigma_fix must be > 0");
    }
    ScalarMap impulses(width, height, 0.0);
    for (const auto& p : fix.points) {
        const long idx = fixation_pixel(p, width, height);
        if (idx >= 0) {
            impulses.values()[static_cast<std::size_t>(idx)] += 1.0;
        }
    }
    return normalize_minmax(gaussian_blur(impulses, sigma_fix, 4.0, Border::Zero));
}

double auc(const ScalarMap& salmap, const FixationSet& fix) {
    if (fix.empty()) {
        throw Error(ErrorCode::InvalidArgument, "AUC needs at least one fixation");
    }
    std::vector<std::uint8_t> hit(salmap.size(), 0);
    std::vector<double> positives;
    positives.reserve(fix.size());
    for (const auto& p : fix.points) {
        const long idx = fixation_pixel(p, salmap.width(), salmap.height());
        if (idx < 0) {
            continue;
        }
        hit[static_cast<std::size_t>(idx)] = 1;
        positives.push_back(salmap.values()[static_cast<std::size_t>(idx)]);
    }
    if (positives.empty()) {
        throw Error(ErrorCode::InvalidArgument, "AUC: no fixation falls inside the map");
    }
    std::vector<double> negatives;
    negatives.reserve(salmap.size());
    for (std::size_t i = 0; i < salmap.size(); ++i) {
        if (hit[i] == 0) {
            negatives.push_back(salmap.values()[i]);
        }
    }
    if (negatives.empty()) {
        throw Error(ErrorCode::InvalidArgument, "AUC: every pixel is fixated, no negatives");
    }
    std::sort(negatives.begin(), negatives.end());
    // Twice the Mann-Whitney U, kept integral so the result is exact up to the final division.
    std::uint64_t twice_u = 0;
    for (double v : positives) {
        const auto lo = std::lower_bound(negatives.begin(), negatives.end(), v);
        const auto hi = std::upper_bound(lo, negatives.end(), v);
        twice_u += 2 * static_cast<std::uint64_t>(lo - negatives.begin()) + static_cast<std::uint64_t>(hi - lo);
    }
    return static_cast<double>(twice_u) /
           (2.0 * static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

namespace {

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

Moments moments(const ScalarMap& m) {
    const double n = static_cast<double>(m.size());
    double sum = 0.0;
    for (double v : m.values()) {
        sum += v;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : m.values()) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / n)};
}

}  // namespace

double nss(const ScalarMap& salmap, const FixationSet& fix) {
    if (fix.empty()) {
        throw Error(ErrorCode::InvalidArgument, "NSS needs at least one fixation");
    }
    if (salmap.empty()) {
        throw Error(ErrorCode::InvalidArgument, "NSS on an empty map");
    }
    const Moments mo = moments(salmap);
    if (!(mo.std > 0.0)) {
        throw Error(ErrorCode::Degenerate, "NSS undefined on constant map");
    }
    double acc = 0.0;
    for (const auto& p : fix.points) {
        acc += (sample_bilinear(salmap, p.x, p.y) - mo.mean) / mo.std;
    }
    return acc / static_cast<double>(fix.size());
}

double cc(const ScalarMap& a, const ScalarMap& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorCode::InvalidArgument, "CC needs maps of equal dimensions");
    }
    if (a.empty()) {
        throw Error(ErrorCode::InvalidArgument, "CC on empty maps");
    }
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    if (!(ma.std > 0.0) || !(mb.std > 0.0)) {
        throw Error(ErrorCode::Degenerate, "CC undefined on constant map");
    }
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a.values()[i] - ma.mean) * (b.values()[i] - mb.mean);
    }
    cov /= static_cast<double>(a.size());
    return std::clamp(cov / (ma.std * mb.std), -1.0, 1.0);
}

}  // namespace vpsal

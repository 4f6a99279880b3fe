#include "vpsal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace vpsal {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void SceneSpec::validate() const {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "scene dimensions must be positive");
    }
    if (!(vp_true.x >= 0.0 && vp_true.y >= 0.0 && vp_true.x < width && vp_true.y < height)) {
        throw Error(ErrorCode::InvalidArgument, "vp_true must lie inside the scene");
    }
    if (n_lines < 2) {
        throw Error(ErrorCode::InvalidArgument, "a scene needs at least two lines");
    }
    if (!(noise_p >= 0.0 && noise_p <= 0.2)) {
        throw Error(ErrorCode::InvalidArgument, "noise_p must be in [0, 0.2]");
    }
    if (!(line_contrast >= 0.0 && line_contrast <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "line_contrast must be in [0, 1]");
    }
}

namespace {

// Distance from the VP to the image border along direction `angle`.
double ray_extent(Point2 vp, double angle, int width, int height) {
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    double t = std::numeric_limits<double>::infinity();
    const double xmax = width - 1.0;
    const double ymax = height - 1.0;
    if (dx > 1e-12) {
        t = std::min(t, (xmax - vp.x) / dx);
    } else if (dx < -1e-12) {
        t = std::min(t, -vp.x / dx);
    }
    if (dy > 1e-12) {
        t = std::min(t, (ymax - vp.y) / dy);
    } else if (dy < -1e-12) {
        t = std::min(t, -vp.y / dy);
    }
    return std::max(0.0, t);
}

// Undirected angular distance modulo pi: collinear rays share one line.
double line_separation(double a, double b) {
    double d = std::fmod(std::abs(a - b), std::numbers::pi);
    return std::min(d, std::numbers::pi - d);
}

}  // namespace

Scene gen_scene(const SceneSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double min_sep = std::min(10.0, 90.0 / spec.n_lines) * std::numbers::pi / 180.0;
    std::vector<double> angles;
    int attempts = 0;
    while (static_cast<int>(angles.size()) < spec.n_lines) {
        if (++attempts > 20000) {
            throw Error(ErrorCode::InvalidArgument, "cannot place " + std::to_string(spec.n_lines) +
                                                        " rays with the requested extent inside the scene");
        }
        const double a = unit(rng) * 2.0 * std::numbers::pi;
        if (ray_extent(spec.vp_true, a, spec.width, spec.height) < spec.min_extent) {
            continue;
        }
        const bool distinct =
            std::all_of(angles.begin(), angles.end(), [&](double b) { return line_separation(a, b) >= min_sep; });
        if (distinct) {
            angles.push_back(a);
        }
    }

    Scene scene;
    scene.vp_true = spec.vp_true;
    scene.ray_angles = angles;
    scene.image = RasterImage(spec.width, spec.height, 3);
    scene.object_map = ScalarMap(spec.width, spec.height, 0.0);

    // Sectors between consecutive rays alternate between light and dark
    // levels; an odd count leaves one sector at the mid level.
    std::vector<double> sorted = angles;
    std::sort(sorted.begin(), sorted.end());
    const int n = static_cast<int>(sorted.size());
    std::vector<double> level(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        level[static_cast<std::size_t>(k)] =
            (n % 2 == 1 && k == n - 1) ? spec.background - 0.5 * spec.line_contrast
                                       : spec.background - (k % 2 == 0 ? 0.0 : spec.line_contrast);
    }
    auto sector_level = [&](double px, double py) {
        double phi = std::atan2(py - spec.vp_true.y, px - spec.vp_true.x);
        if (phi < 0.0) {
            phi += 2.0 * std::numbers::pi;
        }
        auto it = std::upper_bound(sorted.begin(), sorted.end(), phi);
        int k = static_cast<int>(it - sorted.begin()) - 1;
        if (k < 0) {
            k = n - 1;
        }
        return level[static_cast<std::size_t>(k)];
    };
    constexpr int kSuper = 4;
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            double acc = 0.0;
            for (int sy = 0; sy < kSuper; ++sy) {
                for (int sx = 0; sx < kSuper; ++sx) {
                    acc += sector_level(x - 0.5 + (sx + 0.5) / kSuper, y - 0.5 + (sy + 0.5) / kSuper);
                }
            }
            const double v = acc / (kSuper * kSuper) + spec.texture * (2.0 * unit(rng) - 1.0);
            for (int c = 0; c < 3; ++c) {
                scene.image.at(x, y, c) = v;
            }
        }
    }

    for (const Blob& blob : spec.distractors) {
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                const double d = std::hypot(x - blob.center.x, y - blob.center.y);
                const double cover = std::clamp(blob.radius + 0.5 - d, 0.0, 1.0);
                if (cover <= 0.0) {
                    continue;
                }
                scene.object_map(x, y) += cover * blob.intensity;
                const double w = cover;
                const double rgb[3] = {0.95, 0.25, 0.2};
                for (int c = 0; c < 3; ++c) {
                    scene.image.at(x, y, c) = (1.0 - w) * scene.image.at(x, y, c) + w * rgb[c];
                }
            }
        }
    }

    if (spec.noise_p > 0.0) {
        std::bernoulli_distribution salt(spec.noise_p);
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                if (salt(rng)) {
                    for (int c = 0; c < 3; ++c) {
                        scene.image.at(x, y, c) = 1.0;
                    }
                }
            }
        }
    }
    for (double& v : scene.image.values()) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return scene;
}

void FixationModel::validate() const {
    const double sum = vp_weight + saliency_weight + uniform_weight;
    if (vp_weight < 0.0 || saliency_weight < 0.0 || uniform_weight < 0.0 || std::abs(sum - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "fixation mixture weights must be non-negative and sum to 1");
    }
    if (!(sigma_vp_true > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sigma_vp_true must be > 0");
    }
    if (n_fixations < 0) {
        throw Error(ErrorCode::InvalidArgument, "n_fixations must be >= 0");
    }
}

FixationSet gen_fixations(int width, int height, const FixationModel& model, Point2 vp, const ScalarMap* salmap) {
    model.validate();
    std::vector<double> cdf;
    if (model.saliency_weight > 0.0) {
        if (salmap == nullptr || salmap->width() != width || salmap->height() != height) {
            throw Error(ErrorCode::InvalidArgument, "saliency-driven fixations need a map of the image size");
        }
        cdf.resize(salmap->size());
        double acc = 0.0;
        auto v = salmap->values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            acc += std::max(0.0, v[i]);
            cdf[i] = acc;
        }
        if (!(acc > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "saliency map has no mass to draw fixations from");
        }
    }

    std::mt19937_64 rng(model.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, model.sigma_vp_true);
    const double xmax = width - 1.0;
    const double ymax = height - 1.0;

    FixationSet fix;
    fix.points.reserve(static_cast<std::size_t>(model.n_fixations));
    for (int i = 0; i < model.n_fixations; ++i) {
        const double u = unit(rng);
        Point2 p;
        if (u < model.vp_weight) {
            p = {vp.x + normal(rng), vp.y + normal(rng)};
        } else if (u < model.vp_weight + model.saliency_weight) {
            const double target = unit(rng) * cdf.back();
            auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
            // upper_bound lands on a pixel whose cumulative value strictly increases, i.e. positive mass.
            const auto idx = static_cast<long>(
                std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1));
            p ={static_cast<double>(idx % width), static_cast<double>(idx / width)};
        } else {
            p = {unit(rng) * width - 0.5, unit(rng) * height - 0.5};
        }
        p.x = std::clamp(p.x, 0.0, xmax);
        p.y = std::clamp(p.y, 0.0, ymax);
        fix.points.push_back(p);
    }
    return fix;
}

std::vector<SyntheticImage> gen_corpus(const CorpusSpec& spec) {
    if (spec.n_images < 1) {
        throw Error(ErrorCode::InvalidArgument, "corpus needs at least one image");
    }
    if (spec.min_lines < 2 || spec.max_lines < spec.min_lines) {
        throw Error(ErrorCode::InvalidArgument, "invalid line count range");
    }
    std::vector<SyntheticImage> corpus;
    corpus.reserve(static_cast<std::size_t>(spec.n_images));
    for (int i = 0; i < spec.n_images; ++i) {
        std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(i)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> lines(spec.min_lines, spec.max_lines);
        std::uniform_int_distribution<int> blobs(spec.min_distractors, spec.max_distractors);

        SceneSpec scene;
        scene.width = spec.width;
        scene.height = spec.height;
        scene.vp_true = {spec.width * (spec.vp_margin + (1.0 - 2.0 * spec.vp_margin) * unit(rng)),
                         spec.height * (spec.vp_margin + (1.0 - 2.0 * spec.vp_margin) * unit(rng))};
        scene.n_lines = lines(rng);
        scene.noise_p = spec.max_noise_p * unit(rng);
        const int n_blobs = blobs(rng);
        for (int b = 0; b < n_blobs; ++b) {
            Blob blob;
            blob.radius = 8.0 + 10.0 * unit(rng);
            // Keep objects clear of the VP so the two cues stay separable.
            for (int tries = 0; tries < 100; ++tries) {
                blob.center = {blob.radius + (spec.width - 2.0 * blob.radius) * unit(rng),
                               blob.radius + (spec.height - 2.0 * blob.radius) * unit(rng)};
                if (std::hypot(blob.center.x - scene.vp_true.x, blob.center.y - scene.vp_true.y) > 60.0) {
                    break;
                }
            }
            blob.intensity = 0.6 + 0.4 * unit(rng);
            scene.distractors.push_back(blob);
        }
        scene.seed = mix_seed(spec.seed ^ 0x5CE1EULL, static_cast<std::uint64_t>(i));

        SyntheticImage item;
        char id[32];
        std::snprintf(id, sizeof id, "synth_%04d", i);
        item.image_id = id;
        item.scene = gen_scene(scene);

        FixationModel fm = spec.fixations;
        fm.seed = mix_seed(spec.fixations.seed ^ spec.seed, static_cast<std::uint64_t>(i));
        item.fixations = gen_fixations(spec.width, spec.height, fm, item.scene.vp_true, &item.scene.object_map);
        corpus.push_back(std::move(item));
    }
    return corpus;
}

}  // namespace vpsal

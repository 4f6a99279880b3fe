#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpsal/fixations.hpp"
#include "vpsal/raster.hpp"

namespace vpsal {

/// Opaque reddish disc; `intensity` weights it in the object map only.
struct Blob {
    Point2 center;
    double radius = 10.0;
    double intensity = 1.0;
};

/// Perspective-like scene: `n_lines` rays leave `vp_true` and split the
/// image into alternating light/dark sectors, with faint per-pixel texture.
struct SceneSpec {
    int width = 400;
    int height = 300;
    Point2 vp_true{200.0, 150.0};
    int n_lines = 6;
    /// Intensity step across each ray boundary.
    double line_contrast = 0.45;
    /// Per-pixel probability of a salt (white) pixel.
    double noise_p = 0.0;
    std::vector<Blob> distractors;
    std::uint64_t seed = 0;

    /// Minimum in-image length of every ray, from the VP to the border.
    double min_extent = 80.0;
    double background = 0.75;
    /// Amplitude of uniform per-pixel background texture.
    double texture = 0.012;

    void validate() const;
};

struct Scene {
    RasterImage image;
    Point2 vp_true;
    /// Ray directions in radians, [0, 2 pi).
    std::vector<double> ray_angles;
    /// Ground-truth object map: sum of the distractor blob profiles.
    ScalarMap object_map;
};

/// Deterministic per seed. Throws InvalidArgument when the requested rays
/// cannot be placed with the minimum extent.
Scene gen_scene(const SceneSpec& spec);

struct FixationModel {
    double vp_weight = 0.4;
    double saliency_weight = 0.4;
    double uniform_weight = 0.2;
    /// Standard deviation of the VP-attracted component, pixels.
    double sigma_vp_true = 25.0;
    int n_fixations = 150;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Mixture sampler: radial Gaussian at `vp`, the saliency map as a spatial
/// distribution (samples land on pixel centres), or uniform. Clipped to bounds.
FixationSet gen_fixations(int width, int height, const FixationModel& model, Point2 vp, const ScalarMap* salmap);

struct CorpusSpec {
    int n_images = 100;
    int width = 400;
    int height = 300;
    int min_lines = 4;
    int max_lines = 10;
    double max_noise_p = 0.02;
    int min_distractors = 1;
    int max_distractors = 3;
    /// VPs are placed inside the central (1 - 2 * vp_margin) fraction of each axis.
    double vp_margin = 0.2;
    FixationModel fixations;
    std::uint64_t seed = 1;
};

struct SyntheticImage {
    std::string image_id;
    Scene scene;
    FixationSet fixations;
};

std::vector<SyntheticImage> gen_corpus(const CorpusSpec& spec);

/// SplitMix64 mixing step; derives independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace vpsal

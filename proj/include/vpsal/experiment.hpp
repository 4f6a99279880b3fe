#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vpsal/boundary.hpp"
#include "vpsal/combine.hpp"
#include "vpsal/dataset.hpp"
#include "vpsal/lines.hpp"
#include "vpsal/saliency.hpp"
#include "vpsal/vpdetect.hpp"

namespace vpsal {

enum class ChannelKind { Model, Vp, Cg };

/// Ordered channel list, always in model, vp, cg order. Written as e.g. "model+vp".
struct Recipe {
    std::vector<ChannelKind> channels;

    bool uses(ChannelKind k) const;
    std::string name() const;
    static Recipe parse(const std::string& text);

    bool operator==(const Recipe&) const = default;
};

enum class VpSource { Annotation, Detector };
std::string to_string(VpSource s);
VpSource parse_vp_source(const std::string& text);

enum class Score { Auc, Nss, Cc };
inline constexpr std::array<Score, 3> all_scores{Score::Auc, Score::Nss, Score::Cc};
std::string to_string(Score s);

struct ScoreTriple {
    double auc = 0.0;
    double nss = 0.0;
    double cc = 0.0;

    double get(Score s) const;
    double& get(Score s);
};

/// Everything about an image that does not depend on sigma or the combiner.
struct PreparedImage {
    std::string image_id;
    int width = 0;
    int height = 0;
    ScalarMap saliency;
    std::optional<Point2> vp_annotation;
    std::optional<Point2> vp_detected;
    /// Why detection failed, when it did.
    std::string detect_error;
    FixationSet fixations;
    ScalarMap density;
};

struct PrepareConfig {
    /// "builtin", or the manifest model name of precomputed maps.
    std::string saliency_model = "builtin";
    SaliencyConfig saliency;
    BoundaryConfig boundary;
    HoughParams hough;
    double neighbor_radius = 10.0;
    bool detect = true;
    double sigma_fix = 10.0;
};

std::vector<PreparedImage> prepare(const std::vector<LoadedImage>& images, const PrepareConfig& cfg, int jobs = 1);

struct ChannelParams {
    double sigma_vp = 25.0;
    double sigma_cg = 25.0;
    GaussianForm form = GaussianForm::FourSigmaSq;
    VpSource vp_source = VpSource::Annotation;
};

struct Variant {
    std::string name;
    Recipe recipe;
    ChannelParams params;
};

/// Channel rasters in recipe order. Throws NoVanishingPoint when the recipe
/// needs a VP the chosen source does not have.
std::vector<ScalarMap> build_channels(const PreparedImage& img, const Recipe& recipe, const ChannelParams& params);

struct TrainConfig {
    SamplingParams sampling;
    SvmParams svm;
    /// Fraction of images that may be skipped before an aggregate fails.
    double max_skip_fraction = 0.2;
    int jobs = 1;
};

struct ImageScore {
    std::string image_id;
    double auc = 0.0;
    double nss = 0.0;
    double cc = 0.0;
};

struct Skip {
    std::string image_id;
    std::string reason;
};

/// Trains on the listed images. Single-channel recipes get the identity
/// combiner without training.
LinearCombiner train_variant(const std::vector<PreparedImage>& images, const std::vector<std::size_t>& train,
                             const Variant& variant, const TrainConfig& cfg, std::vector<Skip>* skipped = nullptr);

struct VariantEval {
    Variant variant;
    LinearCombiner model;
    /// Sorted by image_id.
    std::vector<ImageScore> per_image;
    ScoreTriple mean;
    std::vector<Skip> skipped;
};

VariantEval evaluate_variant(const std::vector<PreparedImage>& images, const std::vector<std::size_t>& test,
                             const Variant& variant, const LinearCombiner& model, const TrainConfig& cfg);

/// Train on `train`, evaluate on `test`; training skips are merged into the result.
VariantEval run_variant(const std::vector<PreparedImage>& images, const std::vector<std::size_t>& train,
                        const std::vector<std::size_t>& test, const Variant& variant, const TrainConfig& cfg);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Uniform random partition; both halves come back sorted.
Split random_split(std::size_t n, std::size_t n_train, std::uint64_t seed);

enum class SweepTarget { Vp, Cg, Both };
std::string to_string(SweepTarget t);
SweepTarget parse_sweep_target(const std::string& text);

struct SweepResult {
    Variant variant;
    SweepTarget target = SweepTarget::Vp;
    std::vector<double> sigmas;
    std::vector<ScoreTriple> means;
    /// Combiner weights followed by the bias, per sigma.
    std::vector<std::vector<double>> weights;
    std::vector<int> n_images;
    /// Argmax per score; ties go to the smaller sigma.
    ScoreTriple best_sigma;
    /// Peak of the min-max normalized NSS and CC curves summed.
    double best_combined_sigma = 0.0;

    std::size_t best_index(Score s) const;
    std::size_t best_combined_index() const;
};

SweepResult sweep_sigma(const std::vector<PreparedImage>& images, const Split& split, const Variant& base,
                        const std::vector<double>& sigmas, SweepTarget target, const TrainConfig& cfg);

/// Argmax of the summed min-max normalized NSS and CC curves; ties go to the smaller sigma.
std::size_t combined_peak(const std::vector<ScoreTriple>& means, const std::vector<double>& sigmas);

/// `b` may be "chance", which tests `a` against AUC 0.5 and NSS 0.
struct Comparison {
    std::string a;
    std::string b;
};

struct SignificanceRecord {
    std::string comparison;
    std::string score;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    /// Unpaired Welch p-value for the same per-split means; equals p_value for chance tests.
    double p_welch = 1.0;
    bool identical = false;
};

struct CrossValidation {
    std::vector<std::string> variants;
    /// [variant][split] per-split mean scores.
    std::vector<std::vector<ScoreTriple>> per_split;
    std::vector<ScoreTriple> means;
    std::vector<SignificanceRecord> records;
};

CrossValidation cross_validate(const std::vector<PreparedImage>& images, const std::vector<Variant>& variants,
                               const std::vector<Comparison>& comparisons, int n_splits, std::size_t n_train,
                               std::uint64_t seed, const TrainConfig& cfg);

struct ScatterRow {
    std::string image_id;
    double a = 0.0;
    double b = 0.0;
};

struct Scatter {
    std::string a;
    std::string b;
    std::string score;
    std::vector<ScatterRow> rows;
    /// b > a.
    int above = 0;
    int below = 0;
    int on = 0;
};

/// Pairs per-image scores of two evaluations. Throws when the image sets differ.
Scatter per_image_scatter(const VariantEval& a, const VariantEval& b, Score score);

}  // namespace vpsal

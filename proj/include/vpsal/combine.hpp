#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vpsal/fixations.hpp"
#include "vpsal/raster.hpp"

namespace vpsal {

enum class Label : int { Negative = -1, Positive = 1 };

struct TrainingSample {
    /// One value per channel, in channel order (e.g. saliency, VP, center).
    std::vector<double> features;
    Label label = Label::Positive;
    std::string image_id;
};

struct SamplingParams {
    int n_pos = 50;
    int n_neg = 50;
    /// Pixels within this distance of a rounded fixation count as fixated.
    int fixation_radius = 0;
    std::uint64_t seed = 0;
};

/// Draws `n_pos` fixated and `n_neg` never-fixated pixels uniformly without
/// replacement. Throws Data naming the image when either pool is too small.
std::vector<TrainingSample> sample_training(const std::string& image_id, std::span<const ScalarMap> channels,
                                            const FixationSet& fix, const SamplingParams& params);

struct SvmParams {
    double C = 1.0;
    int epochs = 200;
    std::uint64_t seed = 0;

    bool operator==(const SvmParams&) const = default;
};

/// f(X) = W.X + b.
struct LinearCombiner {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<std::string> channel_names;
    SvmParams hyper;
    std::vector<std::string> trained_on;

    double decision(std::span<const double> features) const;

    /// Single-channel pass-through: W = [1], b = 0.
    static LinearCombiner identity(const std::string& channel);

    bool operator==(const LinearCombiner&) const = default;
};

/// Primal hinge objective 0.5*|W|^2 + C * sum max(0, 1 - y (W.X + b)).
double svm_objective(std::span<const double> weights, double bias, const std::vector<TrainingSample>& samples,
                     double C);

struct TrainingTrace {
    /// Primal objective of the running mean of all iterates so far, recorded after each epoch.
    std::vector<double> epoch_objective;
};

/// Linear SVM by epoch-wise stochastic subgradient descent with step
/// 1/(lambda t), lambda = 1/(C N), a seeded shuffle per epoch, and the
/// returned weights averaged over the last 10% of steps.
LinearCombiner train_linear_svm(const std::vector<TrainingSample>& samples, const SvmParams& params = {},
                                TrainingTrace* trace = nullptr);

/// Per-pixel W.X + b over the channels, then min-max normalized.
ScalarMap score_map(const LinearCombiner& model, std::span<const ScalarMap> channels);

std::string combiner_to_json(const LinearCombiner& model);
LinearCombiner combiner_from_json(const std::string& text);
void save_combiner(const LinearCombiner& model, const std::filesystem::path& path);
LinearCombiner load_combiner(const std::filesystem::path& path);

}  // namespace vpsal

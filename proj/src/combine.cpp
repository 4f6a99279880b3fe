#include "vpsal/combine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace vpsal {

namespace {

// Partial Fisher-Yates: the first k entries become a uniform sample without replacement.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool, std::size_t k, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
    return pool;
}

void check_channels(std::span<const ScalarMap> channels) {
    if (channels.empty()) {
        throw Error(ErrorCode::InvalidArgument, "at least one channel is required");
    }
    for (const auto& ch : channels) {
        if (ch.width() != channels[0].width() || ch.height() != channels[0].height()) {
            throw Error(ErrorCode::InvalidArgument, "channel dimensions do not match");
        }
    }
}

}  // namespace

std::vector<TrainingSample> sample_training(const std::string& image_id, std::span<const ScalarMap> channels,
                                            const FixationSet& fix, const SamplingParams& params) {
    check_channels(channels);
    if (params.n_pos < 0 || params.n_neg < 0) {
        throw Error(ErrorCode::InvalidArgument, "sample counts must be >= 0");
    }
    const int w = channels[0].width();
    const int h = channels[0].height();
    const BinaryMap mask = fixation_mask(fix, w, h, params.fixation_radius);

    std::vector<std::size_t> fixated;
    std::vector<std::size_t> background;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        (mask.values()[i] != 0 ? fixated : background).push_back(i);
    }
    if (fixated.size() < static_cast<std::size_t>(params.n_pos)) {
        throw Error(ErrorCode::Data, "image " + image_id + ": only " + std::to_string(fixated.size()) +
                                         " fixated pixels, " + std::to_string(params.n_pos) + " required");
    }
    if (background.size() < static_cast<std::size_t>(params.n_neg)) {
        throw Error(ErrorCode::Data, "image " + image_id + ": only " + std::to_string(background.size()) +
                                         " non-fixated pixels, " + std::to_string(params.n_neg) + " required");
    }

    std::mt19937_64 rng(params.seed);
    const auto pos = draw_without_replacement(std::move(fixated), static_cast<std::size_t>(params.n_pos), rng);
    const auto neg = draw_without_replacement(std::move(background), static_cast<std::size_t>(params.n_neg), rng);

    std::vector<TrainingSample> out;
    out.reserve(pos.size() + neg.size());
    auto emit = [&](std::size_t idx, Label label) {
        TrainingSample s;
        s.features.reserve(channels.size());
        for (const auto& ch : channels) {
            s.features.push_back(ch.values()[idx]);
        }
        s.label = label;
        s.image_id = image_id;
        out.push_back(std::move(s));
    };
    for (std::size_t idx : pos) {
        emit(idx, Label::Positive);
    }
    for (std::size_t idx : neg) {
        emit(idx, Label::Negative);
    }
    return out;
}

double LinearCombiner::decision(std::span<const double> features) const {
    if (features.size() != weights.size()) {
        throw Error(ErrorCode::InvalidArgument, "feature count does not match the combiner");
    }
    double m = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        m += weights[i] * features[i];
    }
    return m;
}

LinearCombiner LinearCombiner::identity(const std::string& channel) {
    LinearCombiner m;
    m.weights = {1.0};
    m.bias = 0.0;
    m.channel_names = {channel};
    return m;
}

double svm_objective(std::span<const double> weights, double bias, const std::vector<TrainingSample>& samples,
                     double C) {
    double reg = 0.0;
    for (double w : weights) {
        reg += w * w;
    }
    double hinge = 0.0;
    for (const auto& s : samples) {
        double m = bias;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            m += weights[i] * s.features[i];
        }
        hinge += std::max(0.0, 1.0 - static_cast<int>(s.label) * m);
    }
    return 0.5 * reg + C * hinge;
}

LinearCombiner train_linear_svm(const std::vector<TrainingSample>& samples, const SvmParams& params,
                                TrainingTrace* trace) {
    if (samples.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no training samples");
    }
    if (!(params.C > 0.0) || params.epochs < 1) {
        throw Error(ErrorCode::InvalidArgument, "SVM needs C > 0 and at least one epoch");
    }
    const std::size_t dim = samples[0].features.size();
    bool has_pos = false;
    bool has_neg = false;
    for (const auto& s : samples) {
        if (s.features.size() != dim) {
            throw Error(ErrorCode::InvalidArgument, "inconsistent feature dimensionality");
        }
        has_pos = has_pos || s.label == Label::Positive;
        has_neg = has_neg || s.label == Label::Negative;
    }
    if (!has_pos || !has_neg) {
        throw Error(ErrorCode::InvalidArgument, "SVM training needs both classes");
    }

    const std::size_t n = samples.size();
    const double lambda = 1.0 / (params.C * static_cast<double>(n));
    const std::uint64_t total = static_cast<std::uint64_t>(params.epochs) * n;
    const std::uint64_t avg_start = total - std::max<std::uint64_t>(1, total / 10);

    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    std::vector<double> w_avg(dim, 0.0);
    double b_avg = 0.0;
    std::uint64_t avg_count = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(params.seed);

    std::vector<double> w_run(dim, 0.0);
    double b_run = 0.0;
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<double> w_epoch(dim, 0.0);
        double b_epoch = 0.0;
        for (std::size_t idx : order) {
            ++t;
            const auto& s = samples[idx];
            const double y = static_cast<int>(s.label);
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            double m = b;
            for (std::size_t i = 0; i < dim; ++i) {
                m += w[i] * s.features[i];
            }
            const double shrink = 1.0 - eta * lambda;
            for (std::size_t i = 0; i < dim; ++i) {
                w[i] *= shrink;
            }
            if (y * m < 1.0) {
                for (std::size_t i = 0; i < dim; ++i) {
                    w[i] += eta * y * s.features[i];
                }
                b += eta * y;
            }
            if (t > avg_start) {
                for (std::size_t i = 0; i < dim; ++i) {
                    w_avg[i] += w[i];
                }
                b_avg += b;
                ++avg_count;
            }
            if (trace != nullptr) {
                for (std::size_t i = 0; i < dim; ++i) {
                    w_epoch[i] += w[i];
                }
                b_epoch += b;
            }
        }
        if (trace != nullptr) {
            for (std::size_t i = 0; i < dim; ++i) {
                w_run[i] += w_epoch[i];
            }
            b_run += b_epoch;
            std::vector<double> wr(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                wr[i] = w_run[i] / static_cast<double>(t);
            }
            trace->epoch_objective.push_back(svm_objective(wr, b_run / static_cast<double>(t), samples, params.C));
        }
    }

    LinearCombiner model;
    model.weights.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        model.weights[i] = w_avg[i] / static_cast<double>(avg_count);
    }
    model.bias = b_avg / static_cast<double>(avg_count);
    model.hyper = params;
    for (const auto& s : samples) {
        if (model.trained_on.empty() || model.trained_on.back() != s.image_id) {
            model.trained_on.push_back(s.image_id);
        }
    }
    std::sort(model.trained_on.begin(), model.trained_on.end());
    model.trained_on.erase(std::unique(model.trained_on.begin(), model.trained_on.end()), model.trained_on.end());
    return model;
}

ScalarMap score_map(const LinearCombiner& model, std::span<const ScalarMap> channels) {
    check_channels(channels);
    if (channels.size() != model.weights.size()) {
        throw Error(ErrorCode::InvalidArgument, "channel count does not match the combiner");
    }
    ScalarMap m(channels[0].width(), channels[0].height(), model.bias);
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const double wc = model.weights[c];
        auto src = channels[c].values();
        auto dst = m.values();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] += wc * src[i];
        }
    }
    return normalize_minmax(m);
}

std::string combiner_to_json(const LinearCombiner& model) {
    nlohmann::json j;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["channel_names"] = model.channel_names;
    j["hyperparams"] = {{"C", model.hyper.C}, {"epochs", model.hyper.epochs}};
    j["seed"] = model.hyper.seed;
    j["trained_on"] = model.trained_on;
    return j.dump(2);
}

LinearCombiner combiner_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        LinearCombiner m;
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.channel_names = j.at("channel_names").get<std::vector<std::string>>();
        m.hyper.C = j.at("hyperparams").at("C").get<double>();
        m.hyper.epochs = j.at("hyperparams").at("epochs").get<int>();
        m.hyper.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("trained_on")) {
            m.trained_on = j.at("trained_on").get<std::vector<std::string>>();
        }
        if (m.weights.size() != m.channel_names.size() || m.weights.empty()) {
            throw Error(ErrorCode::Format, "combiner weights and channel names disagree");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Format, std::string("malformed combiner record: ") + e.what());
    }
}

void save_combiner(const LinearCombiner& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out << combiner_to_json(model) << '\n';
}

LinearCombiner load_combiner(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return combiner_from_json(ss.str());
}

}  // namespace vpsal

#include "vpsal/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "vpsal/error.hpp"
#include "vpsal/metrics.hpp"
#include "vpsal/parallel.hpp"
#include "vpsal/stats.hpp"
#include "vpsal/synth.hpp"

namespace vpsal {

namespace {

const char* channel_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::Model:
            return "model";
        case ChannelKind::Vp:
            return "vp";
        case ChannelKind::Cg:
            return "cg";
    }
    return "?";
}

// FNV-1a; keys per-image randomness to the id rather than to a position in some list.
std::uint64_t hash_id(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

bool skippable(const Error& e) {
    return e.code() == ErrorCode::NoVanishingPoint || e.code() == ErrorCode::Data ||
           e.code() == ErrorCode::Degenerate;
}

void check_skips(std::size_t skipped, std::size_t attempted, double max_fraction, const std::string& what) {
    if (attempted == 0) {
        throw Error(ErrorCode::InvalidArgument, what + ": no images");
    }
    if (static_cast<double>(skipped) > max_fraction * static_cast<double>(attempted) || skipped == attempted) {
        throw Error(ErrorCode::TooManyFailures, what + ": " + std::to_string(skipped) + " of " +
                                                    std::to_string(attempted) + " images failed");
    }
}

}  // namespace

bool Recipe::uses(ChannelKind k) const {
    return std::find(channels.begin(), channels.end(), k) != channels.end();
}

std::string Recipe::name() const {
    std::string out;
    for (auto k : channels) {
        if (!out.empty()) {
            out += '+';
        }
        out += channel_name(k);
    }
    return out;
}

Recipe Recipe::parse(const std::string& text) {
    bool seen[3] = {false, false, false};
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('+', start), text.size());
        const std::string tok = text.substr(start, end - start);
        const int k = tok == "model" ? 0 : tok == "vp" ? 1 : tok == "cg" ? 2 : -1;
        if (k < 0) {
            throw Error(ErrorCode::InvalidArgument, "unknown channel '" + tok + "' in recipe '" + text + "'");
        }
        if (seen[k]) {
            throw Error(ErrorCode::InvalidArgument, "channel '" + tok + "' repeated in recipe '" + text + "'");
        }
        seen[k] = true;
        start = end + 1;
    }
    Recipe r;
    for (int i = 0; i < 3; ++i) {
        if (seen[i]) {
            r.channels.push_back(static_cast<ChannelKind>(i));
        }
    }
    return r;
}

std::string to_string(VpSource s) {
    return s == VpSource::Annotation ? "annotation" : "detector";
}

VpSource parse_vp_source(const std::string& text) {
    if (text == "annotation") {
        return VpSource::Annotation;
    }
    if (text == "detector") {
        return VpSource::Detector;
    }
    throw Error(ErrorCode::InvalidArgument, "vp source must be annotation or detector, got '" + text + "'");
}

std::string to_string(Score s) {
    switch (s) {
        case Score::Auc:
            return "auc";
        case Score::Nss:
            return "nss";
        case Score::Cc:
            return "cc";
    }
    return "?";
}

double ScoreTriple::get(Score s) const {
    return s == Score::Auc ? auc : s == Score::Nss ? nss : cc;
}

double& ScoreTriple::get(Score s) {
    return s == Score::Auc ? auc : s == Score::Nss ? nss : cc;
}

std::vector<PreparedImage> prepare(const std::vector<LoadedImage>& images, const PrepareConfig& cfg, int jobs) {
    std::vector<PreparedImage> out(images.size());
    VpChannelConfig vcfg;
    vcfg.neighbor_radius = cfg.neighbor_radius;
    parallel_for(images.size(), jobs, [&](std::size_t i) {
        const LoadedImage& src = images[i];
        PreparedImage& p = out[i];
        p.image_id = src.image_id;
        p.width = src.image.width();
        p.height = src.image.height();
        if (cfg.saliency_model == "builtin") {
            try {
                p.saliency = builtin_saliency(src.image, cfg.saliency).map;
            } catch (const Error& e) {
                throw Error(e.code(), "image " + src.image_id + ": " + e.what());
            }
        } else {
            const auto it = src.external_maps.find(cfg.saliency_model);
            if (it == src.external_maps.end()) {
                throw Error(ErrorCode::Data, "image " + src.image_id + ": no map for model " + cfg.saliency_model);
            }
            p.saliency = it->second;
        }
        p.vp_annotation = src.annotation;
        if (cfg.detect) {
            try {
                p.vp_detected = detect_vp(src.image, cfg.boundary, cfg.hough, vcfg).location;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoVanishingPoint) {
                    throw;
                }
                p.detect_error = e.what();
            }
        }
        p.fixations = src.fixations;
        if (!p.fixations.empty()) {
            p.density = density_map(p.fixations, p.width, p.height, cfg.sigma_fix);
        }
    });
    return out;
}

std::vector<ScalarMap> build_channels(const PreparedImage& img, const Recipe& recipe, const ChannelParams& params) {
    if (recipe.channels.empty()) {
        throw Error(ErrorCode::InvalidArgument, "recipe has no channels");
    }
    std::vector<ScalarMap> out;
    out.reserve(recipe.channels.size());
    for (auto k : recipe.channels) {
        switch (k) {
            case ChannelKind::Model:
                out.push_back(img.saliency);
                break;
            case ChannelKind::Vp: {
                const auto& vp = params.vp_source == VpSource::Annotation ? img.vp_annotation : img.vp_detected;
                if (!vp) {
                    throw Error(ErrorCode::NoVanishingPoint,
                                "image " + img.image_id + ": no " + to_string(params.vp_source) + " VP" +
                                    (params.vp_source == VpSource::Detector && !img.detect_error.empty()
                                         ? " (" + img.detect_error + ")"
                                         : std::string()));
                }
                out.push_back(vp_gaussian(img.width, img.height, *vp, params.sigma_vp, params.form));
                break;
            }
            case ChannelKind::Cg:
                out.push_back(center_gaussian(img.width, img.height, params.sigma_cg, params.form));
                break;
        }
    }
    return out;
}

LinearCombiner train_variant(const std::vector<PreparedImage>& images, const std::vector<std::size_t>& train,
                             const Variant& variant, const TrainConfig& cfg, std::vector<Skip>* skipped) {
    const Recipe& recipe = variant.recipe;
    if (recipe.channels.size() == 1) {
        return LinearCombiner::identity(recipe.name());
    }
    std::vector<std::vector<TrainingSample>> per_image(train.size());
    std::vector<std::string> errors(train.size());
    parallel_for(train.size(), cfg.jobs, [&](std::size_t k) {
        const PreparedImage& img = images.at(train[k]);
        try {
            const auto channels = build_channels(img, recipe, variant.params);
            SamplingParams sp = cfg.sampling;
            sp.seed = mix_seed(cfg.sampling.seed, hash_id(img.image_id));
            per_image[k] = sample_training(img.image_id, channels, img.fixations, sp);
        } catch (const Error& e) {
            if (!skippable(e)) {
                throw;
            }
            errors[k] = e.what();
        }
    });
    std::vector<TrainingSample> samples;
    std::size_t n_skipped = 0;
    for (std::size_t k = 0; k < train.size(); ++k) {
        if (!errors[k].empty()) {
            ++n_skipped;
            if (skipped != nullptr) {
                skipped->push_back({images[train[k]].image_id, errors[k]});
            }
            continue;
        }
        samples.insert(samples.end(), per_image[k].begin(), per_image[k].end());
    }
    check_skips(n_skipped, train.size(), cfg.max_skip_fraction, "training " + variant.name);

    LinearCombiner model = train_linear_svm(samples, cfg.svm);
    model.channel_names.clear();
    for (auto k : recipe.channels) {
        model.channel_names.push_back(channel_name(k));
    }
    return model;
}

VariantEval evaluate_variant(const std::vector<PreparedImage>& images, const std::vector<std::size_t>& test,
                             const Variant& variant, const LinearCombiner& model, const TrainConfig& cfg) {
    std::vector<std::optional<ImageScore>> scores(test.size());
    std::vector<std::string> errors(test.size());
    parallel_for(test.size(), cfg.jobs, [&](std::size_t k) {
        const PreparedImage& img = images.at(test[k]);
        try {
            if (img.fixations.empty()) {
                throw Error(ErrorCode::Data, "image " + img.image_id + ": no fixations");
            }
            const auto channels = build_channels(img, variant.recipe, variant.params);
            const ScalarMap s = score_map(model, channels);
            scores[k] = ImageScore{img.image_id, auc(s, img.fixations), nss(s, img.fixations), cc(s, img.density)};
        } catch (const Error& e) {
            if (!skippable(e)) {
                throw;
            }
            errors[k] = e.what();
        }
    });

    VariantEval out;
    out.variant = variant;
    out.model = model;
    for (std::size_t k = 0; k < test.size(); ++k) {
        if (scores[k]) {
            out.per_image.push_back(*scores[k]);
        } else {
            out.skipped.push_back({images[test[k]].image_id, errors[k]});
        }
    }
    check_skips(out.skipped.size(), test.size(), cfg.max_skip_fraction, "evaluating " + variant.name);
    std::sort(out.per_image.begin(), out.per_image.end(),
              [](const ImageScore& a, const ImageScore& b) { return a.image_id < b.image_id; });
    for (const auto& s : out.per_image) {
        out.mean.auc += s.auc;
        out.mean.nss += s.nss;
        out.mean.cc += s.cc;
    }
    const double n = static_cast<double>(out.per_image.size());
    out.mean.auc /= n;
    out.mean.nss /= n;
    out.mean.cc /= n;
    return out;
}

VariantEval run_variant(const std::vector<PreparedImage>& images, const std::vector<std::size_t>& train,
                        const std::vector<std::size_t>& test, const Variant& variant, const TrainConfig& cfg) {
    std::vector<Skip> train_skips;
    const LinearCombiner model = train_variant(images, train, variant, cfg, &train_skips);
    VariantEval ev = evaluate_variant(images, test, variant, model, cfg);
    ev.skipped.insert(ev.skipped.begin(), train_skips.begin(), train_skips.end());
    return ev;
}

Split random_split(std::size_t n, std::size_t n_train, std::uint64_t seed) {
    if (n_train == 0 || n_train >= n) {
        throw Error(ErrorCode::InvalidArgument, "train count must be in [1, " + std::to_string(n) + "), got " +
                                                    std::to_string(n_train));
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

std::string to_string(SweepTarget t) {
    switch (t) {
        case SweepTarget::Vp:
            return "vp";
        case SweepTarget::Cg:
            return "cg";
        case SweepTarget::Both:
            return "both";
    }
    return "?";
}

SweepTarget parse_sweep_target(const std::string& text) {
    if (text == "vp") {
        return SweepTarget::Vp;
    }
    if (text == "cg") {
        return SweepTarget::Cg;
    }
    if (text == "both") {
        return SweepTarget::Both;
    }
    throw Error(ErrorCode::InvalidArgument, "sweep target must be vp, cg or both, got '" + text + "'");
}

namespace {

std::size_t argmax_smaller_sigma(const std::vector<double>& values, const std::vector<double>& sigmas) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best] || (values[i] == values[best] && sigmas[i] < sigmas[best])) {
            best = i;
        }
    }
    return best;
}

std::vector<double> minmax(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    std::vector<double> out(v.size(), 0.0);
    if (*hi > *lo) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            out[i] = (v[i] - *lo) / (*hi - *lo);
        }
    }
    return out;
}

}  // namespace

std::size_t combined_peak(const std::vector<ScoreTriple>& means, const std::vector<double>& sigmas) {
    if (means.empty() || means.size() != sigmas.size()) {
        throw Error(ErrorCode::InvalidArgument, "combined peak needs one score triple per sigma");
    }
    std::vector<double> nss(means.size());
    std::vector<double> cc(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        nss[i] = means[i].nss;
        cc[i] = means[i].cc;
    }
    const auto a = minmax(nss);
    const auto b = minmax(cc);
    std::vector<double> sum(means.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
        sum[i] = a[i] + b[i];
    }
    return argmax_smaller_sigma(sum, sigmas);
}

std::size_t SweepResult::best_index(Score s) const {
    std::vector<double> v(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        v[i] = means[i].get(s);
    }
    return argmax_smaller_sigma(v, sigmas);
}

std::size_t SweepResult::best_combined_index() const {
    return combined_peak(means, sigmas);
}

SweepResult sweep_sigma(const std::vector<PreparedImage>& images, const Split& split, const Variant& base,
                        const std::vector<double>& sigmas, SweepTarget target, const TrainConfig& cfg) {
    if (sigmas.empty()) {
        throw Error(ErrorCode::InvalidArgument, "sigma list is empty");
    }
    for (double s : sigmas) {
        if (!(s > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "sigma values must be > 0");
        }
    }
    SweepResult r;
    r.variant = base;
    r.target = target;
    r.sigmas = sigmas;
    for (double s : sigmas) {
        Variant v = base;
        if (target != SweepTarget::Cg) {
            v.params.sigma_vp = s;
        }
        if (target != SweepTarget::Vp) {
            v.params.sigma_cg = s;
        }
        const VariantEval ev = run_variant(images, split.train, split.test, v, cfg);
        r.means.push_back(ev.mean);
        std::vector<double> w = ev.model.weights;
        w.push_back(ev.model.bias);
        r.weights.push_back(std::move(w));
        r.n_images.push_back(static_cast<int>(ev.per_image.size()));
    }
    for (Score s : all_scores) {
        r.best_sigma.get(s) = sigmas[r.best_index(s)];
    }
    r.best_combined_sigma = sigmas[r.best_combined_index()];
    return r;
}

CrossValidation cross_validate(const std::vector<PreparedImage>& images, const std::vector<Variant>& variants,
                               const std::vector<Comparison>& comparisons, int n_splits, std::size_t n_train,
                               std::uint64_t seed, const TrainConfig& cfg) {
    if (n_splits < 2) {
        throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least 2 splits");
    }
    if (variants.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least one variant");
    }
    CrossValidation cv;
    for (const auto& v : variants) {
        cv.variants.push_back(v.name);
    }
    auto find = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(cv.variants.begin(), cv.variants.end(), name);
        if (it == cv.variants.end()) {
            throw Error(ErrorCode::InvalidArgument, "comparison names unknown variant '" + name + "'");
        }
        return static_cast<std::size_t>(it - cv.variants.begin());
    };
    for (const auto& c : comparisons) {
        find(c.a);
        if (c.b != "chance") {
            find(c.b);
        }
    }

    cv.per_split.assign(variants.size(), {});
    for (int s = 0; s < n_splits; ++s) {
        const auto stream = static_cast<std::uint64_t>(s);
        const Split split = random_split(images.size(), n_train, mix_seed(seed, 3 * stream));
        TrainConfig tc = cfg;
        tc.sampling.seed = mix_seed(seed, 3 * stream + 1);
        tc.svm.seed = mix_seed(seed, 3 * stream + 2);
        for (std::size_t v = 0; v < variants.size(); ++v) {
            cv.per_split[v].push_back(run_variant(images, split.train, split.test, variants[v], tc).mean);
        }
    }

    auto column = [&](std::size_t v, Score sc) {
        std::vector<double> out;
        for (const auto& t : cv.per_split[v]) {
            out.push_back(t.get(sc));
        }
        return out;
    };
    for (std::size_t v = 0; v < variants.size(); ++v) {
        ScoreTriple m;
        for (Score sc : all_scores) {
            m.get(sc) = mean(column(v, sc));
        }
        cv.means.push_back(m);
    }

    for (const auto& c : comparisons) {
        const std::size_t ia = find(c.a);
        for (Score sc : all_scores) {
            SignificanceRecord rec;
            rec.comparison = c.a + " vs. " + c.b;
            rec.score = to_string(sc);
            const auto xa = column(ia, sc);
            TTest t;
            if (c.b == "chance") {
                if (sc == Score::Cc) {
                    continue;
                }
                t = one_sample_t_test(xa, sc == Score::Auc ? 0.5 : 0.0);
                rec.p_welch = t.p;
            } else {
                const auto xb = column(find(c.b), sc);
                t = paired_t_test(xa, xb);
                rec.p_welch = welch_t_test(xa, xb).p;
            }
            rec.mean_a = t.mean_a;
            rec.mean_b = t.mean_b;
            rec.t = t.t;
            rec.df = t.df;
            rec.p_value = t.p;
            rec.identical = t.identical;
            cv.records.push_back(rec);
        }
    }
    return cv;
}

Scatter per_image_scatter(const VariantEval& a, const VariantEval& b, Score score) {
    if (a.per_image.size() != b.per_image.size()) {
        throw Error(ErrorCode::InvalidArgument, "scatter needs both models scored on the same images");
    }
    Scatter out;
    out.a = a.variant.name;
    out.b = b.variant.name;
    out.score = to_string(score);
    for (std::size_t i = 0; i < a.per_image.size(); ++i) {
        const auto& ra = a.per_image[i];
        const auto& rb = b.per_image[i];
        if (ra.image_id != rb.image_id) {
            throw Error(ErrorCode::InvalidArgument, "scatter needs both models scored on the same images");
        }
        const double va = score == Score::Auc ? ra.auc : score == Score::Nss ? ra.nss : ra.cc;
        const double vb = score == Score::Auc ? rb.auc : score == Score::Nss ? rb.nss : rb.cc;
        out.rows.push_back({ra.image_id, va, vb});
        if (vb > va) {
            ++out.above;
        } else if (vb < va) {
            ++out.below;
        } else {
            ++out.on;
        }
    }
    return out;
}

}  // namespace vpsal

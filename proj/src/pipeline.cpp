#include "vpsal/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vpsal/error.hpp"
#include "vpsal/image_io.hpp"
#include "vpsal/parallel.hpp"
#include "vpsal/stats.hpp"

namespace vpsal {

using nlohmann::json;

RunConfig::RunConfig() {
    for (int s = 15; s <= 50; ++s) {
        sigma_vp_list.push_back(s);
    }
}

std::vector<VpSource> RunConfig::sources() const {
    if (vp_source == "both") {
        return {VpSource::Annotation, VpSource::Detector};
    }
    return {parse_vp_source(vp_source)};
}

std::string RunConfig::saliency_model_name() const {
    if (saliency.rfind("dir:", 0) == 0) {
        if (!model_name.empty()) {
            return model_name;
        }
        return std::filesystem::path(saliency.substr(4)).lexically_normal().filename().string();
    }
    return saliency;
}

IngestConfig RunConfig::ingest_config() const {
    IngestConfig c;
    c.working_max_side = working_max_side;
    if (saliency != "builtin") {
        c.external_models = {saliency_model_name()};
    }
    return c;
}

PrepareConfig RunConfig::prepare_config() const {
    PrepareConfig c;
    c.saliency_model = saliency == "builtin" ? "builtin" : saliency_model_name();
    c.boundary = boundary;
    c.hough = hough;
    c.neighbor_radius = neighbor_radius;
    c.sigma_fix = sigma_fix;
    const auto src = sources();
    c.detect = std::find(src.begin(), src.end(), VpSource::Detector) != src.end();
    return c;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.sampling.n_pos = n_pos;
    t.sampling.n_neg = n_neg;
    t.sampling.fixation_radius = fixation_radius;
    t.sampling.seed = mix_seed(seed, 1);
    t.svm.C = svm_c;
    t.svm.epochs = svm_epochs;
    t.svm.seed = mix_seed(seed, 2);
    t.max_skip_fraction = max_skip_fraction;
    t.jobs = jobs;
    return t;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
    if (working_max_side < 64) {
        fail("working_max_side must be >= 64");
    }
    if (saliency.empty() || saliency == "dir:") {
        fail("saliency must be builtin, dir:<path> or a manifest model name");
    }
    Recipe::parse(recipe);
    sources();
    if (!(sigma_vp > 0.0) || !(sigma_cg > 0.0)) {
        fail("sigma_vp and sigma_cg must be > 0");
    }
    for (const auto* list : {&sigma_vp_list, &sigma_cg_list}) {
        for (double s : *list) {
            if (!(s > 0.0)) {
                fail("sigma lists must hold positive values");
            }
        }
    }
    if (sigma_vp_list.empty()) {
        fail("sigma_vp_list is empty");
    }
    if (train_count < 1) {
        fail("train_count must be >= 1");
    }
    if (xval_splits < 0) {
        fail("xval_splits must be >= 0");
    }
    if (!(sigma_fix > 0.0) || fixation_radius < 0 || n_pos < 1 || n_neg < 1) {
        fail("sampling settings out of range");
    }
    if (!(svm_c > 0.0) || svm_epochs < 1) {
        fail("SVM needs C > 0 and at least one epoch");
    }
    boundary.validate();
    hough.validate();
    if (!(neighbor_radius > 0.0)) {
        fail("neighbor_radius must be > 0");
    }
    if (!(max_skip_fraction >= 0.0 && max_skip_fraction <= 1.0)) {
        fail("max_skip_fraction must be in [0, 1]");
    }
    if (jobs < 1) {
        fail("jobs must be >= 1");
    }
}

std::vector<double> parse_sigma_list(const std::string& text) {
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) {
                throw std::invalid_argument(s);
            }
            return v;
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "bad sigma list '" + text + "'");
        }
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) {
            parts.push_back(p);
        }
        if (parts.size() != 3) {
            throw Error(ErrorCode::InvalidArgument, "sigma range must be start:stop:step, got '" + text + "'");
        }
        const double a = number(parts[0]);
        const double b = number(parts[1]);
        const double step = number(parts[2]);
        if (!(step > 0.0) || b < a) {
            throw Error(ErrorCode::InvalidArgument, "bad sigma range '" + text + "'");
        }
        const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
        for (long i = 0; i <= n; ++i) {
            out.push_back(a + static_cast<double>(i) * step);
        }
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) {
            if (!p.empty()) {
                out.push_back(number(p));
            }
        }
    }
    if (out.empty()) {
        throw Error(ErrorCode::InvalidArgument, "sigma list '" + text + "' is empty");
    }
    return out;
}

namespace {

std::string form_name(GaussianForm f) {
    return f == GaussianForm::FourSigmaSq ? "4sigma2" : "2sigma2";
}

GaussianForm parse_form(const std::string& s) {
    if (s == "4sigma2") {
        return GaussianForm::FourSigmaSq;
    }
    if (s == "2sigma2") {
        return GaussianForm::TwoSigmaSq;
    }
    throw Error(ErrorCode::InvalidArgument, "gaussian form must be 4sigma2 or 2sigma2, got '" + s + "'");
}

std::vector<double> sigma_list_from(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        return s.empty() ? std::vector<double>{} : parse_sigma_list(s);
    }
    return v.get<std::vector<double>>();
}

std::string join_sigmas(const std::vector<double>& v) {
    std::string out;
    char buf[32];
    for (double s : v) {
        std::snprintf(buf, sizeof buf, "%g", s);
        out += (out.empty() ? "" : ",") + std::string(buf);
    }
    return out;
}

}  // namespace

void apply_config(RunConfig& cfg, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
    }
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "manifest") {
                cfg.manifest = v.get<std::string>();
            } else if (key == "working_max_side") {
                cfg.working_max_side = v.get<int>();
            } else if (key == "saliency") {
                cfg.saliency = v.get<std::string>();
            } else if (key == "model_name") {
                cfg.model_name = v.get<std::string>();
            } else if (key == "recipe") {
                cfg.recipe = v.get<std::string>();
            } else if (key == "vp_source") {
                cfg.vp_source = v.get<std::string>();
            } else if (key == "sigma_vp") {
                cfg.sigma_vp = v.get<double>();
            } else if (key == "sigma_cg") {
                cfg.sigma_cg = v.get<double>();
            } else if (key == "sigma_vp_list") {
                cfg.sigma_vp_list = sigma_list_from(v);
            } else if (key == "sigma_cg_list") {
                cfg.sigma_cg_list = sigma_list_from(v);
            } else if (key == "gaussian_form") {
                cfg.form = parse_form(v.get<std::string>());
            } else if (key == "train_count") {
                cfg.train_count = v.get<std::size_t>();
            } else if (key == "seed") {
                cfg.seed = v.get<std::uint64_t>();
            } else if (key == "xval_splits") {
                cfg.xval_splits = v.get<int>();
            } else if (key == "sigma_fix") {
                cfg.sigma_fix = v.get<double>();
            } else if (key == "fixation_radius") {
                cfg.fixation_radius = v.get<int>();
            } else if (key == "n_pos") {
                cfg.n_pos = v.get<int>();
            } else if (key == "n_neg") {
                cfg.n_neg = v.get<int>();
            } else if (key == "svm_c") {
                cfg.svm_c = v.get<double>();
            } else if (key == "svm_epochs") {
                cfg.svm_epochs = v.get<int>();
            } else if (key == "threshold_multiplier") {
                cfg.boundary.threshold_multiplier = v.get<double>();
            } else if (key == "smoothing_sigma") {
                cfg.boundary.smoothing_sigma = v.get<double>();
            } else if (key == "theta_bins") {
                cfg.hough.theta_bins = v.get<int>();
            } else if (key == "vote_threshold") {
                cfg.hough.vote_threshold = v.get<int>();
            } else if (key == "rho_resolution") {
                cfg.hough.rho_resolution = v.get<double>();
            } else if (key == "neighbor_radius") {
                cfg.neighbor_radius = v.get<double>();
            } else if (key == "max_skip_fraction") {
                cfg.max_skip_fraction = v.get<double>();
            } else if (key == "jobs") {
                cfg.jobs = v.get<int>();
            } else {
                throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidArgument, "config key '" + key + "': " + e.what());
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidArgument, "cannot read config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config(cfg, ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["manifest"] = cfg.manifest.generic_string();
    j["working_max_side"] = cfg.working_max_side;
    j["saliency"] = cfg.saliency;
    j["model_name"] = cfg.model_name;
    j["recipe"] = cfg.recipe;
    j["vp_source"] = cfg.vp_source;
    j["sigma_vp"] = cfg.sigma_vp;
    j["sigma_cg"] = cfg.sigma_cg;
    j["sigma_vp_list"] = cfg.sigma_vp_list;
    j["sigma_cg_list"] = cfg.sigma_cg_list;
    j["gaussian_form"] = form_name(cfg.form);
    j["train_count"] = cfg.train_count;
    j["seed"] = cfg.seed;
    j["xval_splits"] = cfg.xval_splits;
    j["sigma_fix"] = cfg.sigma_fix;
    j["fixation_radius"] = cfg.fixation_radius;
    j["n_pos"] = cfg.n_pos;
    j["n_neg"] = cfg.n_neg;
    j["svm_c"] = cfg.svm_c;
    j["svm_epochs"] = cfg.svm_epochs;
    j["threshold_multiplier"] = cfg.boundary.threshold_multiplier;
    j["smoothing_sigma"] = cfg.boundary.smoothing_sigma;
    j["theta_bins"] = cfg.hough.theta_bins;
    j["vote_threshold"] = cfg.hough.vote_threshold;
    j["rho_resolution"] = cfg.hough.rho_resolution;
    j["neighbor_radius"] = cfg.neighbor_radius;
    j["max_skip_fraction"] = cfg.max_skip_fraction;
    j["jobs"] = cfg.jobs;
    return j.dump(2);
}

namespace {

DatasetManifest read_with_saliency(const RunConfig& cfg) {
    DatasetManifest m = read_manifest(cfg.manifest);
    if (cfg.saliency.rfind("dir:", 0) == 0) {
        const auto dir = std::filesystem::absolute(cfg.saliency.substr(4));
        const std::string model = cfg.saliency_model_name();
        for (auto& e : m.entries) {
            e.maps[model] = dir / (e.image_id + "." + model + ".png");
        }
    }
    return m;
}

}  // namespace

std::vector<PreparedImage> load_dataset(const RunConfig& cfg, const LogFn& log) {
    cfg.validate();
    const DatasetManifest m = read_with_saliency(cfg);
    const auto loaded = ingest(m, cfg.ingest_config(), log, cfg.jobs);
    auto prepared = prepare(loaded, cfg.prepare_config(), cfg.jobs);
    if (log) {
        for (const auto& p : prepared) {
            if (!p.detect_error.empty()) {
                log("image " + p.image_id + ": " + p.detect_error);
            }
        }
    }
    return prepared;
}

DetectReport cmd_detect(const RunConfig& cfg, const DetectionDiagnostics& diag, const LogFn& log) {
    cfg.validate();
    IngestConfig ic = cfg.ingest_config();
    ic.external_models.clear();
    const auto loaded = ingest(read_manifest(cfg.manifest), ic, log, cfg.jobs);
    for (const auto* dir : {&diag.boundary_dir, &diag.lines_dir}) {
        if (*dir) {
            std::filesystem::create_directories(**dir);
        }
    }
    VpChannelConfig vcfg;
    vcfg.neighbor_radius = cfg.neighbor_radius;
    DetectReport rep;
    rep.records.resize(loaded.size());
    parallel_for(loaded.size(), cfg.jobs, [&](std::size_t i) {
        const LoadedImage& img = loaded[i];
        DetectionRecord& r = rep.records[i];
        r.image_id = img.image_id;
        r.annotation = img.annotation;
        DetectionTrace trace;
        try {
            const VpEstimate est = detect_vp(img.image, cfg.boundary, cfg.hough, vcfg, &trace);
            r.detected = est.location;
            r.support = est.support;
            if (r.annotation) {
                r.error_px = detector_error(est.location, *r.annotation);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoVanishingPoint) {
                throw;
            }
            r.error = e.what();
        }
        if (diag.boundary_dir && !trace.boundary.empty()) {
            save_map(trace.boundary, *diag.boundary_dir / (img.image_id + ".boundary.png"));
            ScalarMap bin(trace.binary.width(), trace.binary.height());
            for (std::size_t k = 0; k < bin.size(); ++k) {
                bin.values()[k] = trace.binary.values()[k] != 0 ? 1.0 : 0.0;
            }
            save_map(bin, *diag.boundary_dir / (img.image_id + ".edges.png"));
        }
        if (diag.lines_dir) {
            save_image(overlay_lines(img.image, trace.lines), *diag.lines_dir / (img.image_id + ".lines.png"));
        }
    });
    std::vector<double> errors;
    bool any_annotation = false;
    for (const auto& r : rep.records) {
        any_annotation = any_annotation || r.annotation.has_value();
        if (r.detected) {
            ++rep.summary.detected;
        } else {
            ++rep.summary.failed;
            if (log) {
                log("image " + r.image_id + ": no_vp: " + r.error);
            }
        }
        if (r.error_px) {
            errors.push_back(*r.error_px);
        }
    }
    if (any_annotation) {
        rep.summary.error_histogram = error_histogram(errors, rep.summary.bin_width);
    }
    return rep;
}

std::string detections_to_jsonl(const DetectReport& report) {
    std::string out;
    for (const auto& r : report.records) {
        json j;
        j["image_id"] = r.image_id;
        j["no_vp"] = !r.detected.has_value();
        j["vp"] = r.detected ? json{r.detected->x, r.detected->y} : json(nullptr);
        j["support"] = r.support;
        if (r.annotation) {
            j["annotation"] = {r.annotation->x, r.annotation->y};
        }
        if (r.error_px) {
            j["error_px"] = *r.error_px;
        }
        if (!r.error.empty()) {
            j["reason"] = r.error;
        }
        out += j.dump() + '\n';
    }
    return out;
}

namespace {

std::string source_suffix(VpSource s) {
    return "@" + to_string(s);
}

void log_skips(const LogFn& log, const VariantEval& ev) {
    if (log && !ev.skipped.empty()) {
        log(ev.variant.name + ": skipped " + std::to_string(ev.skipped.size()) + " images (first: " +
            ev.skipped.front().image_id + ": " + ev.skipped.front().reason + ")");
    }
}

void add_improvements(EvalReport& rep, const SweepEntry& entry, const std::string& base_name,
                      const ScoreTriple& base) {
    for (Score sc : all_scores) {
        const std::size_t k = entry.result.best_index(sc);
        ImprovementRecord rec;
        rec.column = entry.column;
        rec.vp_source = entry.vp_source;
        rec.score = to_string(sc);
        rec.base = base_name;
        rec.base_mean = base.get(sc);
        rec.combined_mean = entry.result.means[k].get(sc);
        rec.sigma = entry.result.sigmas[k];
        rec.percent = improvement(rec.base_mean, rec.combined_mean);
        rep.improvements.push_back(rec);
    }
}

void add_scatters(EvalReport& rep, const VariantEval& a, const VariantEval& b) {
    for (Score sc : all_scores) {
        const Scatter s = per_image_scatter(a, b, sc);
        rep.scatters.push_back({s.a, s.b, s.score, s.above, s.below, s.on});
    }
}

// Restricts an evaluation to the images another evaluation also scored, so the two can be paired.
VariantEval restrict_to(const VariantEval& ev, const VariantEval& other) {
    VariantEval out = ev;
    out.per_image.clear();
    std::size_t j = 0;
    for (const auto& s : ev.per_image) {
        while (j < other.per_image.size() && other.per_image[j].image_id < s.image_id) {
            ++j;
        }
        if (j < other.per_image.size() && other.per_image[j].image_id == s.image_id) {
            out.per_image.push_back(s);
        }
    }
    return out;
}

}  // namespace

EvalReport run_experiment(const std::vector<PreparedImage>& images, const RunConfig& cfg, const LogFn& log) {
    cfg.validate();
    if (images.size() <= cfg.train_count) {
        throw Error(ErrorCode::Data, "dataset of " + std::to_string(images.size()) +
                                         " images is too small for train_count " + std::to_string(cfg.train_count));
    }
    const TrainConfig tc = cfg.train_config();
    const auto sources = cfg.sources();

    EvalReport rep;
    rep.meta = {{"saliency", cfg.saliency_model_name()},
                {"n_images", std::to_string(images.size())},
                {"train_count", std::to_string(cfg.train_count)},
                {"seed", std::to_string(cfg.seed)},
                {"sigma_vp_list", join_sigmas(cfg.sigma_vp_list)},
                {"sigma_cg_list", join_sigmas(cfg.sigma_cg_list)},
                {"gaussian_form", form_name(cfg.form)},
                {"svm_c", json(cfg.svm_c).dump()},
                {"svm_epochs", std::to_string(cfg.svm_epochs)},
                {"n_pos", std::to_string(cfg.n_pos)},
                {"n_neg", std::to_string(cfg.n_neg)},
                {"fixation_radius", std::to_string(cfg.fixation_radius)},
                {"sigma_fix", json(cfg.sigma_fix).dump()},
                {"xval_splits", std::to_string(cfg.xval_splits)}};
    for (auto s : sources) {
        rep.sources.push_back(to_string(s));
    }

    const Split split = random_split(images.size(), cfg.train_count, mix_seed(cfg.seed, 0));
    for (auto i : split.train) {
        rep.train_ids.push_back(images[i].image_id);
    }
    for (auto i : split.test) {
        rep.test_ids.push_back(images[i].image_id);
    }

    ChannelParams p0;
    p0.sigma_vp = cfg.sigma_vp;
    p0.sigma_cg = cfg.sigma_cg;
    p0.form = cfg.form;
    p0.vp_source = sources.front();

    const VariantEval base = run_variant(images, split.train, split.test, {"model", Recipe::parse("model"), p0}, tc);
    log_skips(log, base);
    rep.variants.push_back(base);

    auto sweep = [&](const std::string& column, const std::string& recipe, std::optional<VpSource> src,
                     SweepTarget target, const std::vector<double>& sigmas, double fixed_vp) {
        ChannelParams p = p0;
        p.sigma_vp = fixed_vp;
        if (src) {
            p.vp_source = *src;
        }
        const Variant v{recipe + (src ? source_suffix(*src) : std::string()), Recipe::parse(recipe), p};
        if (log) {
            log("sweeping " + v.name + " over sigma_" + to_string(target));
        }
        rep.sweeps.push_back({column, src ? to_string(*src) : std::string(),
                              sweep_sigma(images, split, v, sigmas, target, tc)});
        return rep.sweeps.back();
    };

    const bool with_cg = !cfg.sigma_cg_list.empty();
    std::optional<SweepEntry> cg_model;
    std::optional<SweepEntry> cg_only;
    if (with_cg) {
        cg_model = sweep("Model + CG", "model+cg", std::nullopt, SweepTarget::Cg, cfg.sigma_cg_list, cfg.sigma_vp);
        cg_only = sweep("CG only", "cg", std::nullopt, SweepTarget::Cg, cfg.sigma_cg_list, cfg.sigma_vp);
    }

    struct PerSource {
        VpSource src;
        SweepEntry combined;
        SweepEntry vp_only;
    };
    std::vector<PerSource> per_source;
    for (VpSource src : sources) {
        SweepEntry c = sweep("Model + VP", "model+vp", src, SweepTarget::Vp, cfg.sigma_vp_list, cfg.sigma_vp);
        SweepEntry v = sweep("VP only", "vp", src, SweepTarget::Vp, cfg.sigma_vp_list, cfg.sigma_vp);
        add_improvements(rep, c, "model", base.mean);
        per_source.push_back({src, c, v});
    }
    if (with_cg) {
        add_improvements(rep, *cg_model, "model", base.mean);
        for (const auto& ps : per_source) {
            const SweepEntry full = sweep("Model + CG + VP", "model+vp+cg", ps.src, SweepTarget::Cg,
                                          cfg.sigma_cg_list, ps.combined.result.best_combined_sigma);
            const auto& cgm = cg_model->result;
            add_improvements(rep, full, "model+cg", cgm.means[cgm.best_combined_index()]);
        }
    }

    // Per-image results at the sigma chosen by summed normalized NSS and CC.
    auto final_eval = [&](const SweepEntry& e) {
        Variant v = e.result.variant;
        if (e.result.target != SweepTarget::Cg) {
            v.params.sigma_vp = e.result.best_combined_sigma;
        }
        if (e.result.target != SweepTarget::Vp) {
            v.params.sigma_cg = e.result.best_combined_sigma;
        }
        VariantEval ev = run_variant(images, split.train, split.test, v, tc);
        log_skips(log, ev);
        rep.variants.push_back(ev);
        return ev;
    };
    std::optional<VariantEval> cg_model_eval;
    std::optional<VariantEval> cg_only_eval;
    if (with_cg) {
        cg_model_eval = final_eval(*cg_model);
        cg_only_eval = final_eval(*cg_only);
    }
    for (const auto& ps : per_source) {
        const VariantEval comb = final_eval(ps.combined);
        const VariantEval vp = final_eval(ps.vp_only);
        add_scatters(rep, restrict_to(base, comb), restrict_to(comb, base));
        if (with_cg) {
            add_scatters(rep, restrict_to(*cg_only_eval, vp), restrict_to(vp, *cg_only_eval));
        }
    }
    if (with_cg) {
        for (const auto& e : rep.sweeps) {
            if (e.result.variant.recipe.channels.size() == 3) {
                const VariantEval full = final_eval(e);
                add_scatters(rep, restrict_to(*cg_model_eval, full), restrict_to(full, *cg_model_eval));
            }
        }
    }

    if (cfg.xval_splits >= 2) {
        const PerSource& ps = per_source.front();
        ChannelParams p = p0;
        p.vp_source = ps.src;
        std::vector<Variant> variants;
        variants.push_back({"M", Recipe::parse("model"), p});
        p.sigma_vp = ps.vp_only.result.best_combined_sigma;
        variants.push_back({"VP_b", Recipe::parse("vp"), p});
        p.sigma_vp = ps.combined.result.best_combined_sigma;
        variants.push_back({"M+VP_b", Recipe::parse("model+vp"), p});
        std::vector<Comparison> comparisons;
        if (with_cg) {
            p.sigma_cg = cg_model->result.best_combined_sigma;
            variants.push_back({"M+CG_b", Recipe::parse("model+cg"), p});
            variants.push_back({"M+VP_b+CG_b", Recipe::parse("model+vp+cg"), p});
            comparisons.push_back({"M+VP_b+CG_b", "M+CG_b"});
        }
        comparisons.push_back({"M+VP_b", "VP_b"});
        comparisons.push_back({"M+VP_b", "M"});
        comparisons.push_back({"VP_b", "chance"});
        if (log) {
            log("cross-validating over " + std::to_string(cfg.xval_splits) + " splits");
        }
        rep.significance = cross_validate(images, variants, comparisons, cfg.xval_splits, cfg.train_count,
                                          mix_seed(cfg.seed, 3), tc)
                               .records;
    }

    const bool detect = std::find(sources.begin(), sources.end(), VpSource::Detector) != sources.end();
    if (detect) {
        DetectionSummary d;
        std::vector<double> errors;
        bool any_annotation = false;
        for (const auto& img : images) {
            img.vp_detected ? ++d.detected : ++d.failed;
            any_annotation = any_annotation || img.vp_annotation.has_value();
            if (img.vp_detected && img.vp_annotation) {
                errors.push_back(detector_error(*img.vp_detected, *img.vp_annotation));
            }
        }
        if (any_annotation) {
            d.error_histogram = error_histogram(errors, d.bin_width);
        }
        rep.detection = d;
    }
    return rep;
}

EvalReport cmd_experiment(const RunConfig& cfg, const LogFn& log) {
    return run_experiment(load_dataset(cfg, log), cfg, log);
}

std::filesystem::path write_synthetic_corpus(const CorpusSpec& spec, const std::filesystem::path& dir, int jobs) {
    namespace fs = std::filesystem;
    const auto corpus = gen_corpus(spec);
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "fixations");
    fs::create_directories(dir / "maps");
    DatasetManifest m;
    m.base_dir = dir;
    m.entries.resize(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        const SyntheticImage& s = corpus[i];
        ManifestEntry& e = m.entries[i];
        e.image_id = s.image_id;
        e.image_path = "images/" + s.image_id + ".png";
        e.annotation = s.scene.vp_true;
        e.fixation_file = "fixations/" + s.image_id + ".csv";
        e.maps["objects"] = "maps/" + s.image_id + ".objects.png";
        save_image(s.scene.image, dir / e.image_path);
        save_map(normalize_minmax(s.scene.object_map), dir / e.maps["objects"]);
        write_fixation_file({spec.width, spec.height, s.fixations}, dir / *e.fixation_file);
    });
    const fs::path manifest = dir / "manifest.jsonl";
    write_manifest(m, manifest);
    return manifest;
}

void dump_maps(const std::vector<PreparedImage>& images, const RunConfig& cfg, const std::filesystem::path& dir,
               const LinearCombiner* model, const LogFn& log) {
    std::filesystem::create_directories(dir);
    const auto sources = cfg.sources();
    const Recipe recipe = Recipe::parse(cfg.recipe);
    parallel_for(images.size(), cfg.jobs, [&](std::size_t i) {
        const PreparedImage& img = images[i];
        const auto base = dir / img.image_id;
        save_map(img.saliency, base.string() + ".saliency.png");
        save_map(center_gaussian(img.width, img.height, cfg.sigma_cg, cfg.form), base.string() + ".cg.png");
        if (!img.density.empty()) {
            save_map(img.density, base.string() + ".density.png");
        }
        for (VpSource src : sources) {
            const auto& vp = src == VpSource::Annotation ? img.vp_annotation : img.vp_detected;
            if (vp) {
                save_map(vp_gaussian(img.width, img.height, *vp, cfg.sigma_vp, cfg.form),
                         base.string() + ".vp_" + to_string(src) + ".png");
            }
        }
        if (model != nullptr) {
            ChannelParams p;
            p.sigma_vp = cfg.sigma_vp;
            p.sigma_cg = cfg.sigma_cg;
            p.form = cfg.form;
            p.vp_source = sources.front();
            try {
                save_map(score_map(*model, build_channels(img, recipe, p)), base.string() + ".combined.png");
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoVanishingPoint) {
                    throw;
                }
            }
        }
    });
    if (log && model != nullptr) {
        for (const auto& img : images) {
            const bool has = sources.front() == VpSource::Annotation ? img.vp_annotation.has_value()
                                                                     : img.vp_detected.has_value();
            if (recipe.uses(ChannelKind::Vp) && !has) {
                log("image " + img.image_id + ": no VP, combined map not written");
            }
        }
    }
}

int exit_code(const Error& e) {
    switch (e.code()) {
        case ErrorCode::InvalidArgument:
            return 1;
        case ErrorCode::TooManyFailures:
            return 3;
        default:
            return 2;
    }
}

}  // namespace vpsal

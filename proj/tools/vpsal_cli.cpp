// vpsal command-line tool.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "vpsal/error.hpp"
#include "vpsal/parallel.hpp"
#include "vpsal/pipeline.hpp"

using namespace vpsal;

namespace {

struct Flags {
    std::string config;
    std::string sigma_vp_list;
    std::string sigma_cg_list;
    std::string form = "4sigma2";
    bool quiet = false;
};

void bind_run_config(CLI::App* cmd, RunConfig& cfg, Flags& f) {
    cmd->add_option("--manifest", cfg.manifest, "Dataset manifest (JSON lines)");
    cmd->add_option("--working-max-side", cfg.working_max_side, "Longer side of the working raster")
        ->capture_default_str();
    cmd->add_option("--saliency", cfg.saliency, "builtin, dir:<path>, or a model named in the manifest")
        ->capture_default_str();
    cmd->add_option("--model-name", cfg.model_name, "Map file suffix for dir: saliency");
    cmd->add_option("--recipe", cfg.recipe, "Channels, e.g. model+vp+cg")->capture_default_str();
    cmd->add_option("--vp-source", cfg.vp_source, "annotation, detector or both")->capture_default_str();
    cmd->add_option("--sigma-vp", cfg.sigma_vp)->capture_default_str();
    cmd->add_option("--sigma-cg", cfg.sigma_cg)->capture_default_str();
    cmd->add_option("--sigma-vp-list", f.sigma_vp_list, "start:stop:step or a,b,c (default 15:50:1)");
    cmd->add_option("--sigma-cg-list", f.sigma_cg_list, "Enables center-bias variants");
    cmd->add_option("--gaussian-form", f.form, "4sigma2 or 2sigma2")->capture_default_str();
    cmd->add_option("--train-count", cfg.train_count)->capture_default_str();
    cmd->add_option("--seed", cfg.seed)->capture_default_str();
    cmd->add_option("--xval-splits", cfg.xval_splits, "0 disables cross-validation")->capture_default_str();
    cmd->add_option("--sigma-fix", cfg.sigma_fix)->capture_default_str();
    cmd->add_option("--fixation-radius", cfg.fixation_radius)->capture_default_str();
    cmd->add_option("--n-pos", cfg.n_pos)->capture_default_str();
    cmd->add_option("--n-neg", cfg.n_neg)->capture_default_str();
    cmd->add_option("--svm-c", cfg.svm_c)->capture_default_str();
    cmd->add_option("--svm-epochs", cfg.svm_epochs)->capture_default_str();
    cmd->add_option("--threshold-multiplier", cfg.boundary.threshold_multiplier)->capture_default_str();
    cmd->add_option("--smoothing-sigma", cfg.boundary.smoothing_sigma)->capture_default_str();
    cmd->add_option("--theta-bins", cfg.hough.theta_bins)->capture_default_str();
    cmd->add_option("--vote-threshold", cfg.hough.vote_threshold)->capture_default_str();
    cmd->add_option("--rho-resolution", cfg.hough.rho_resolution)->capture_default_str();
    cmd->add_option("--neighbor-radius", cfg.neighbor_radius)->capture_default_str();
    cmd->add_option("--max-skip-fraction", cfg.max_skip_fraction)->capture_default_str();
    cmd->add_option("--jobs,-j", cfg.jobs, "Worker threads (default from VPSAL_JOBS)")->capture_default_str();
    cmd->add_option("--config", f.config, "JSON file; its keys override flags");
    cmd->add_flag("--quiet,-q", f.quiet, "No per-image log lines");
}

void finish_config(RunConfig& cfg, const Flags& f) {
    if (!f.sigma_vp_list.empty()) {
        cfg.sigma_vp_list = parse_sigma_list(f.sigma_vp_list);
    }
    if (!f.sigma_cg_list.empty()) {
        cfg.sigma_cg_list = parse_sigma_list(f.sigma_cg_list);
    }
    apply_config(cfg, "{\"gaussian_form\": \"" + f.form + "\"}");
    if (!f.config.empty()) {
        apply_config_file(cfg, f.config);
    }
    if (cfg.manifest.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--manifest is required");
    }
    cfg.validate();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path);
    }
    out << text;
}

Recipe recipe_of(const LinearCombiner& m) {
    std::string name;
    for (const auto& c : m.channel_names) {
        name += (name.empty() ? "" : "+") + c;
    }
    return Recipe::parse(name);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string scores_line(const ScoreTriple& s) {
    return "AUC " + fmt(s.auc) + "  NSS " + fmt(s.nss) + "  CC " + fmt(s.cc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixation prediction with vanishing-point and center-bias channels"};
    app.require_subcommand(1);

    RunConfig cfg;
    cfg.jobs = default_jobs();
    Flags flags;

    auto* detect = app.add_subcommand("detect", "Detect the vanishing point of every image");
    std::string detect_out;
    std::string dump_boundary;
    std::string dump_lines;
    detect->add_option("--out,-o", detect_out, "JSON lines output (default stdout)");
    detect->add_option("--dump-boundary", dump_boundary, "Directory for boundary and edge maps");
    detect->add_option("--dump-lines", dump_lines, "Directory for line overlays");

    auto* maps = app.add_subcommand("maps", "Write saliency, VP, center and density maps");
    std::string maps_out;
    std::string maps_model;
    maps->add_option("--out,-o", maps_out, "Output directory")->required();
    maps->add_option("--model", maps_model, "Trained combiner; also writes the combined map");

    auto* train = app.add_subcommand("train", "Train a combiner on the training split");
    std::string train_out;
    train->add_option("--out,-o", train_out, "Combiner JSON")->required();

    auto* eval = app.add_subcommand("eval", "Score a trained combiner on images it was not trained on");
    std::string eval_model;
    std::string eval_out;
    eval->add_option("--model", eval_model, "Combiner JSON")->required();
    eval->add_option("--out,-o", eval_out, "Per-image CSV");

    auto* sweep = app.add_subcommand("sweep", "Score the recipe over a sigma list");
    std::string sweep_target = "vp";
    std::string sweep_out;
    sweep->add_option("--target", sweep_target, "vp, cg or both")->capture_default_str();
    sweep->add_option("--out,-o", sweep_out, "CSV output (default stdout)");

    auto* xval = app.add_subcommand("xval", "Repeated random splits with significance tests");
    std::string xval_out;
    xval->add_option("--out,-o", xval_out, "JSON output");

    auto* synth = app.add_subcommand("synth", "Render a synthetic corpus");
    CorpusSpec spec;
    std::string synth_out;
    synth->add_option("--out,-o", synth_out, "Output directory")->required();
    synth->add_option("--n-images", spec.n_images)->capture_default_str();
    synth->add_option("--width", spec.width)->capture_default_str();
    synth->add_option("--height", spec.height)->capture_default_str();
    synth->add_option("--seed", spec.seed)->capture_default_str();
    synth->add_option("--fixations", spec.fixations.n_fixations, "Fixations per image")->capture_default_str();
    synth->add_option("--vp-weight", spec.fixations.vp_weight)->capture_default_str();
    synth->add_option("--saliency-weight", spec.fixations.saliency_weight)->capture_default_str();
    synth->add_option("--uniform-weight", spec.fixations.uniform_weight)->capture_default_str();
    synth->add_option("--sigma-vp-true", spec.fixations.sigma_vp_true)->capture_default_str();
    synth->add_option("--jobs,-j", cfg.jobs)->capture_default_str();

    auto* report = app.add_subcommand("report", "Run the full experiment and print the results table");
    std::string report_from;
    std::string report_out;
    std::string report_csv_dir;
    report->add_option("--from", report_from, "Render a saved report instead of running");
    report->add_option("--out,-o", report_out, "Save the report as JSON");
    report->add_option("--sweep-csv", report_csv_dir, "Directory for one CSV per sweep");

    for (auto* cmd : {detect, maps, train, eval, sweep, xval, report}) {
        bind_run_config(cmd, cfg, flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const LogFn log = [&](const std::string& msg) {
        if (!flags.quiet) {
            std::cerr << "vpsal: " << msg << '\n';
        }
    };

    try {
        if (synth->parsed()) {
            spec.fixations.validate();
            const auto path = write_synthetic_corpus(spec, synth_out, cfg.jobs);
            std::cout << path.string() << '\n';
            return 0;
        }
        if (report->parsed() && !report_from.empty()) {
            std::cout << render_table(load_report(report_from));
            return 0;
        }
        finish_config(cfg, flags);

        if (detect->parsed()) {
            DetectionDiagnostics diag;
            if (!dump_boundary.empty()) {
                diag.boundary_dir = dump_boundary;
            }
            if (!dump_lines.empty()) {
                diag.lines_dir = dump_lines;
            }
            const DetectReport rep = cmd_detect(cfg, diag, log);
            write_text(detect_out, detections_to_jsonl(rep));
            std::cerr << "detected " << rep.summary.detected << ", no VP " << rep.summary.failed << '\n';
            return 0;
        }

        const auto images = load_dataset(cfg, log);
        const TrainConfig tc = cfg.train_config();
        ChannelParams params;
        params.sigma_vp = cfg.sigma_vp;
        params.sigma_cg = cfg.sigma_cg;
        params.form = cfg.form;
        params.vp_source = cfg.sources().front();
        const Recipe recipe = Recipe::parse(cfg.recipe);
        auto split = [&] {
            if (images.size() <= cfg.train_count) {
                throw Error(ErrorCode::Data, "dataset of " + std::to_string(images.size()) +
                                                 " images is too small for train_count " +
                                                 std::to_string(cfg.train_count));
            }
            return random_split(images.size(), cfg.train_count, mix_seed(cfg.seed, 0));
        };

        if (maps->parsed()) {
            std::optional<LinearCombiner> model;
            if (!maps_model.empty()) {
                model = load_combiner(maps_model);
                cfg.recipe = recipe_of(*model).name();
            }
            dump_maps(images, cfg, maps_out, model ? &*model : nullptr, log);
            return 0;
        }
        if (train->parsed()) {
            const Split s = split();
            std::vector<Skip> skipped;
            const LinearCombiner m =
                train_variant(images, s.train, {recipe.name(), recipe, params}, tc, &skipped);
            for (const auto& k : skipped) {
                log("image " + k.image_id + " skipped: " + k.reason);
            }
            save_combiner(m, train_out);
            for (std::size_t i = 0; i < m.weights.size(); ++i) {
                std::cout << m.channel_names[i] << ' ' << m.weights[i] << '\n';
            }
            std::cout << "bias " << m.bias << '\n';
            return 0;
        }
        if (eval->parsed()) {
            const LinearCombiner m = load_combiner(eval_model);
            const std::set<std::string> seen(m.trained_on.begin(), m.trained_on.end());
            std::vector<std::size_t> test;
            for (std::size_t i = 0; i < images.size(); ++i) {
                if (!seen.count(images[i].image_id)) {
                    test.push_back(i);
                }
            }
            if (test.empty()) {
                throw Error(ErrorCode::Data, "every image was used to train the model");
            }
            const VariantEval ev = evaluate_variant(images, test, {recipe_of(m).name(), recipe_of(m), params}, m, tc);
            for (const auto& k : ev.skipped) {
                log("image " + k.image_id + " skipped: " + k.reason);
            }
            if (!eval_out.empty()) {
                std::string csv = "image_id,auc,nss,cc\n";
                char buf[160];
                for (const auto& r : ev.per_image) {
                    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", r.auc, r.nss, r.cc);
                    csv += r.image_id + buf;
                }
                write_text(eval_out, csv);
            }
            std::cout << ev.per_image.size() << " images  " << scores_line(ev.mean) << '\n';
            return 0;
        }
        if (sweep->parsed()) {
            const SweepTarget target = parse_sweep_target(sweep_target);
            const auto& sigmas =
                target == SweepTarget::Cg && !cfg.sigma_cg_list.empty() ? cfg.sigma_cg_list : cfg.sigma_vp_list;
            const SweepResult r = sweep_sigma(images, split(), {recipe.name(), recipe, params}, sigmas, target, tc);
            write_text(sweep_out, sweep_csv(r));
            std::cerr << "best sigma: AUC " << r.best_sigma.auc << ", NSS " << r.best_sigma.nss << ", CC "
                      << r.best_sigma.cc << ", combined " << r.best_combined_sigma << '\n';
            return 0;
        }
        if (xval->parsed()) {
            std::vector<Variant> variants{{"model", Recipe::parse("model"), params}};
            std::vector<Comparison> comparisons;
            if (recipe.uses(ChannelKind::Vp)) {
                variants.push_back({"vp", Recipe::parse("vp"), params});
                comparisons.push_back({"vp", "chance"});
            }
            if (recipe.channels.size() > 1) {
                variants.push_back({recipe.name(), recipe, params});
                comparisons.push_back({recipe.name(), "model"});
                if (recipe.uses(ChannelKind::Vp)) {
                    comparisons.push_back({recipe.name(), "vp"});
                }
            }
            comparisons.push_back({"model", "chance"});
            const CrossValidation cv = cross_validate(images, variants, comparisons, cfg.xval_splits,
                                                      cfg.train_count, mix_seed(cfg.seed, 3), tc);
            EvalReport rep;
            rep.significance = cv.records;
            for (std::size_t v = 0; v < cv.variants.size(); ++v) {
                std::cout << cv.variants[v] << ": " << scores_line(cv.means[v]) << '\n';
            }
            if (!xval_out.empty()) {
                write_text(xval_out, report_to_json(rep));
            }
            std::cout << render_table(rep);
            return 0;
        }
        if (report->parsed()) {
            const EvalReport rep = run_experiment(images, cfg, log);
            if (!report_out.empty()) {
                save_report(rep, report_out);
            }
            if (!report_csv_dir.empty()) {
                std::filesystem::create_directories(report_csv_dir);
                for (const auto& e : rep.sweeps) {
                    std::string name = e.result.variant.name;
                    for (char& c : name) {
                        c = (c == '+' || c == '@') ? '_' : c;
                    }
                    write_text((std::filesystem::path(report_csv_dir) / (name + ".csv")).string(),
                               sweep_csv(e.result));
                }
            }
            std::cout << render_table(rep);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "vpsal: error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "vpsal: error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

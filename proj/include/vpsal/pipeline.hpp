#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vpsal/dataset.hpp"
#include "vpsal/experiment.hpp"
#include "vpsal/report.hpp"
#include "vpsal/synth.hpp"

namespace vpsal {

/// Every knob of a run. The command-line tool binds one flag per field and
/// a JSON config file, when given, is applied on top of the flags.
struct RunConfig {
    std::filesystem::path manifest;
    int working_max_side = 400;
    /// "builtin" or "dir:<path>"; see `saliency_model_name`.
    std::string saliency = "builtin";
    /// Model name for dir: maps (files `<image_id>.<model>.png`); defaults to the directory name.
    std::string model_name;

    std::string recipe = "model+vp";
    /// "annotation", "detector" or "both".
    std::string vp_source = "both";
    double sigma_vp = 25.0;
    double sigma_cg = 25.0;
    std::vector<double> sigma_vp_list;
    /// Empty disables the center-bias part of the experiment.
    std::vector<double> sigma_cg_list;
    GaussianForm form = GaussianForm::FourSigmaSq;

    std::size_t train_count = 50;
    std::uint64_t seed = 1;
    int xval_splits = 20;

    double sigma_fix = 10.0;
    int fixation_radius = 0;
    int n_pos = 50;
    int n_neg = 50;
    double svm_c = 1.0;
    int svm_epochs = 200;

    BoundaryConfig boundary;
    HoughParams hough;
    double neighbor_radius = 10.0;

    double max_skip_fraction = 0.2;
    int jobs = 1;

    RunConfig();

    /// Sources named by `vp_source`, annotation first.
    std::vector<VpSource> sources() const;
    std::string saliency_model_name() const;
    IngestConfig ingest_config() const;
    PrepareConfig prepare_config() const;
    /// Sampling and SVM seeds derive from `seed`.
    TrainConfig train_config() const;
    void validate() const;
};

/// Parses "15:50:1" (inclusive range) or "10,20,35".
std::vector<double> parse_sigma_list(const std::string& text);

/// Overrides fields named in a JSON object; unknown keys are an error.
void apply_config(RunConfig& cfg, const std::string& json_text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

/// Ingest plus per-image preparation; images in image_id order.
std::vector<PreparedImage> load_dataset(const RunConfig& cfg, const LogFn& log = {});

struct DetectionRecord {
    std::string image_id;
    std::optional<Point2> detected;
    std::optional<Point2> annotation;
    std::string error;
    /// Set when both a detection and an annotation exist.
    std::optional<double> error_px;
    int support = 0;
};

struct DetectionDiagnostics {
    /// When set, boundary maps and binarized edges are written here as PNG.
    std::optional<std::filesystem::path> boundary_dir;
    /// When set, detected lines are drawn over the image and written here.
    std::optional<std::filesystem::path> lines_dir;
};

struct DetectReport {
    std::vector<DetectionRecord> records;
    DetectionSummary summary;
};

/// detect_vp per image of the manifest. Images without a VP are flagged and
/// left out of the histogram, which is only filled when annotations exist.
DetectReport cmd_detect(const RunConfig& cfg, const DetectionDiagnostics& diag = {}, const LogFn& log = {});
std::string detections_to_jsonl(const DetectReport& report);

/// Full protocol on prepared images: split, baseline, sigma sweeps per VP
/// source (and center-bias variants when a sigma_cg list is set), final
/// evaluations at the combined best sigma, improvements, per-image win
/// counts and, with xval_splits >= 2, cross-validated significance tests.
EvalReport run_experiment(const std::vector<PreparedImage>& images, const RunConfig& cfg, const LogFn& log = {});

EvalReport cmd_experiment(const RunConfig& cfg, const LogFn& log = {});

/// Renders a corpus to `dir`: PNG images, fixation files, manifest.jsonl
/// with the true VP as annotation. Returns the manifest path.
std::filesystem::path write_synthetic_corpus(const CorpusSpec& spec, const std::filesystem::path& dir,
                                             int jobs = 1);

/// Writes saliency, VP, center and density rasters per image (and the
/// combined map when a model is given) as 16-bit PNG.
void dump_maps(const std::vector<PreparedImage>& images, const RunConfig& cfg, const std::filesystem::path& dir,
               const LinearCombiner* model = nullptr, const LogFn& log = {});

/// Exit status for an error: 1 usage, 3 too many per-image failures, 2 otherwise.
int exit_code(const Error& e);

}  // namespace vpsal

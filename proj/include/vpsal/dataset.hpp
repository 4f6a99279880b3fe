#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpsal/fixations.hpp"
#include "vpsal/raster.hpp"

namespace vpsal {

namespace fs = std::filesystem;

/// One manifest line. Paths are stored as written; relative ones resolve
/// against the manifest's directory.
struct ManifestEntry {
    std::string image_id;
    fs::path image_path;
    /// VP center at original resolution.
    std::optional<Point2> annotation;
    std::optional<fs::path> fixation_file;
    /// Saliency model name -> precomputed map.
    std::map<std::string, fs::path> maps;
};

struct DatasetManifest {
    fs::path base_dir;
    std::vector<ManifestEntry> entries;

    fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }
};

/// JSON-lines: one object per line with keys image_id, image, annotation
/// ([x, y], optional), fixations (optional) and maps ({model: path}, optional).
/// Blank lines and lines starting with '#' are skipped.
DatasetManifest read_manifest(const fs::path& path);
void write_manifest(const DatasetManifest& manifest, const fs::path& path);

struct FixationFile {
    int original_width = 0;
    int original_height = 0;
    FixationSet fixations;
};

/// Header `width,height`, then `x,y[,observer]` rows.
FixationFile read_fixation_file(const fs::path& path);
void write_fixation_file(const FixationFile& file, const fs::path& path);

/// Maps original-resolution coordinates to the working raster: subtract the
/// margin crop offset, then scale per axis.
struct Frame {
    int original_width = 0;
    int original_height = 0;
    int offset_x = 0;
    int offset_y = 0;
    int cropped_width = 0;
    int cropped_height = 0;
    int width = 0;
    int height = 0;

    double scale_x() const { return static_cast<double>(width) / cropped_width; }
    double scale_y() const { return static_cast<double>(height) / cropped_height; }
    Point2 to_working(Point2 p) const;
    Point2 to_original(Point2 p) const;
};

struct IngestConfig {
    int working_max_side = 400;
    bool crop_margins = true;
    double margin_tolerance = 2.0 / 255.0;
    /// Model names whose external maps should be loaded; empty loads none.
    std::vector<std::string> external_models;
};

struct LoadedImage {
    std::string image_id;
    RasterImage image;
    Frame frame;
    std::optional<Point2> annotation;
    FixationSet fixations;
    int dropped_fixations = 0;
    std::map<std::string, ScalarMap> external_maps;
};

using LogFn = std::function<void(const std::string&)>;

/// Per image: load, crop gray margins, resize to the working scale and carry
/// annotations and fixations through the same transform. Fixations landing
/// outside the working raster are dropped and counted. Results are ordered by
/// image_id.
std::vector<LoadedImage> ingest(const DatasetManifest& manifest, const IngestConfig& cfg = {},
                                const LogFn& log = {}, int jobs = 1);

/// Single-entry form of ingest.
LoadedImage ingest_entry(const DatasetManifest& manifest, const ManifestEntry& entry, const IngestConfig& cfg);

}  // namespace vpsal

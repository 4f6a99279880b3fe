#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpsal/experiment.hpp"

namespace vpsal {

/// A sweep plus where it goes in the results table.
struct SweepEntry {
    /// Table column, e.g. "Model + VP".
    std::string column;
    /// Empty when the swept variant does not depend on the VP source.
    std::string vp_source;
    SweepResult result;
};

struct ImprovementRecord {
    std::string column;
    std::string vp_source;
    std::string score;
    std::string base;
    double base_mean = 0.0;
    double combined_mean = 0.0;
    double sigma = 0.0;
    double percent = 0.0;
};

struct ScatterSummary {
    std::string a;
    std::string b;
    std::string score;
    int above = 0;
    int below = 0;
    int on = 0;
};

struct DetectionSummary {
    int detected = 0;
    int failed = 0;
    double bin_width = 5.0;
    /// Empty without annotations.
    std::vector<int> error_histogram;
};

struct EvalReport {
    /// Run settings, echoed for provenance of the numbers.
    std::map<std::string, std::string> meta;
    std::vector<std::string> sources;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::vector<VariantEval> variants;
    std::vector<SweepEntry> sweeps;
    std::vector<ImprovementRecord> improvements;
    std::vector<ScatterSummary> scatters;
    std::vector<SignificanceRecord> significance;
    std::optional<DetectionSummary> detection;
};

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

/// Score x model grid: one row per VP source with the best sigma in
/// parentheses, an improvement row and a learned-weights row per score,
/// followed by significance and scatter summaries when present.
std::string render_table(const EvalReport& report);

/// Header `sigma,auc,nss,cc`, one row per swept sigma.
std::string sweep_csv(const SweepResult& sweep);

}  // namespace vpsal

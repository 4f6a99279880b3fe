#include "vpsal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "vpsal/error.hpp"

namespace vpsal {

using nlohmann::json;

namespace {

// JSON has no infinities; a degenerate t statistic is written as a string.
json num(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    if (std::isnan(v)) {
        return "nan";
    }
    return v > 0 ? "inf" : "-inf";
}

double num_from(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

json triple_json(const ScoreTriple& t) {
    return {{"auc", t.auc}, {"nss", t.nss}, {"cc", t.cc}};
}

ScoreTriple triple_from(const json& j) {
    return {j.at("auc").get<double>(), j.at("nss").get<double>(), j.at("cc").get<double>()};
}

std::string form_name(GaussianForm f) {
    return f == GaussianForm::FourSigmaSq ? "4sigma2" : "2sigma2";
}

GaussianForm form_from(const std::string& s) {
    if (s == "4sigma2") {
        return GaussianForm::FourSigmaSq;
    }
    if (s == "2sigma2") {
        return GaussianForm::TwoSigmaSq;
    }
    throw Error(ErrorCode::Format, "unknown gaussian form '" + s + "'");
}

json variant_json(const Variant& v) {
    return {{"name", v.name},
            {"recipe", v.recipe.name()},
            {"vp_source", to_string(v.params.vp_source)},
            {"sigma_vp", v.params.sigma_vp},
            {"sigma_cg", v.params.sigma_cg},
            {"gaussian_form", form_name(v.params.form)}};
}

Variant variant_from(const json& j) {
    Variant v;
    v.name = j.at("name").get<std::string>();
    v.recipe = Recipe::parse(j.at("recipe").get<std::string>());
    v.params.vp_source = parse_vp_source(j.at("vp_source").get<std::string>());
    v.params.sigma_vp = j.at("sigma_vp").get<double>();
    v.params.sigma_cg = j.at("sigma_cg").get<double>();
    v.params.form = form_from(j.at("gaussian_form").get<std::string>());
    return v;
}

json eval_json(const VariantEval& ev) {
    json per = json::array();
    for (const auto& s : ev.per_image) {
        per.push_back({{"image_id", s.image_id}, {"auc", s.auc}, {"nss", s.nss}, {"cc", s.cc}});
    }
    json skipped = json::array();
    for (const auto& s : ev.skipped) {
        skipped.push_back({{"image_id", s.image_id}, {"reason", s.reason}});
    }
    return {{"variant", variant_json(ev.variant)},
            {"weights", ev.model.weights},
            {"bias", ev.model.bias},
            {"channel_names", ev.model.channel_names},
            {"mean", triple_json(ev.mean)},
            {"per_image", per},
            {"skipped", skipped}};
}

VariantEval eval_from(const json& j) {
    VariantEval ev;
    ev.variant = variant_from(j.at("variant"));
    ev.model.weights = j.at("weights").get<std::vector<double>>();
    ev.model.bias = j.at("bias").get<double>();
    ev.model.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    ev.mean = triple_from(j.at("mean"));
    for (const auto& r : j.at("per_image")) {
        ev.per_image.push_back(
            {r.at("image_id").get<std::string>(), r.at("auc").get<double>(), r.at("nss").get<double>(),
             r.at("cc").get<double>()});
    }
    for (const auto& r : j.at("skipped")) {
        ev.skipped.push_back({r.at("image_id").get<std::string>(), r.at("reason").get<std::string>()});
    }
    return ev;
}

json sweep_json(const SweepEntry& e) {
    const SweepResult& r = e.result;
    json auc = json::array();
    json nss = json::array();
    json cc = json::array();
    for (const auto& m : r.means) {
        auc.push_back(m.auc);
        nss.push_back(m.nss);
        cc.push_back(m.cc);
    }
    return {{"column", e.column},
            {"vp_source", e.vp_source},
            {"variant", variant_json(r.variant)},
            {"target", to_string(r.target)},
            {"sigmas", r.sigmas},
            {"auc", auc},
            {"nss", nss},
            {"cc", cc},
            {"weights", r.weights},
            {"n_images", r.n_images},
            {"best_sigma", triple_json(r.best_sigma)},
            {"best_combined_sigma", r.best_combined_sigma}};
}

SweepEntry sweep_from(const json& j) {
    SweepEntry e;
    e.column = j.at("column").get<std::string>();
    e.vp_source = j.at("vp_source").get<std::string>();
    SweepResult& r = e.result;
    r.variant = variant_from(j.at("variant"));
    r.target = parse_sweep_target(j.at("target").get<std::string>());
    r.sigmas = j.at("sigmas").get<std::vector<double>>();
    const auto auc = j.at("auc").get<std::vector<double>>();
    const auto nss = j.at("nss").get<std::vector<double>>();
    const auto cc = j.at("cc").get<std::vector<double>>();
    if (auc.size() != r.sigmas.size() || nss.size() != r.sigmas.size() || cc.size() != r.sigmas.size()) {
        throw Error(ErrorCode::Format, "sweep curves do not match the sigma list");
    }
    for (std::size_t i = 0; i < r.sigmas.size(); ++i) {
        r.means.push_back({auc[i], nss[i], cc[i]});
    }
    r.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    r.n_images = j.at("n_images").get<std::vector<int>>();
    r.best_sigma = triple_from(j.at("best_sigma"));
    r.best_combined_sigma = j.at("best_combined_sigma").get<double>();
    return e;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sigma_text(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", s);
    return buf;
}

std::string source_label(const std::string& s) {
    if (s == "annotation") {
        return "A";
    }
    if (s == "detector") {
        return "D";
    }
    return s;
}

const std::vector<std::string> kScoreNames{"AUC", "NSS", "CC"};

}  // namespace

std::string report_to_json(const EvalReport& r) {
    json j;
    j["meta"] = r.meta;
    j["sources"] = r.sources;
    j["split"] = {{"train", r.train_ids}, {"test", r.test_ids}};
    j["variants"] = json::array();
    for (const auto& v : r.variants) {
        j["variants"].push_back(eval_json(v));
    }
    j["sweeps"] = json::array();
    for (const auto& s : r.sweeps) {
        j["sweeps"].push_back(sweep_json(s));
    }
    j["improvements"] = json::array();
    for (const auto& i : r.improvements) {
        j["improvements"].push_back({{"column", i.column},
                                     {"vp_source", i.vp_source},
                                     {"score", i.score},
                                     {"base", i.base},
                                     {"base_mean", i.base_mean},
                                     {"combined_mean", i.combined_mean},
                                     {"sigma", i.sigma},
                                     {"percent", i.percent}});
    }
    j["scatter"] = json::array();
    for (const auto& s : r.scatters) {
        j["scatter"].push_back(
            {{"a", s.a}, {"b", s.b}, {"score", s.score}, {"above", s.above}, {"below", s.below}, {"on", s.on}});
    }
    j["significance"] = json::array();
    for (const auto& s : r.significance) {
        j["significance"].push_back({{"comparison", s.comparison},
                                     {"score", s.score},
                                     {"mean_a", s.mean_a},
                                     {"mean_b", s.mean_b},
                                     {"t", num(s.t)},
                                     {"df", s.df},
                                     {"p_value", s.p_value},
                                     {"p_welch", s.p_welch},
                                     {"identical", s.identical}});
    }
    if (r.detection) {
        j["detection"] = {{"detected", r.detection->detected},
                          {"failed", r.detection->failed},
                          {"bin_width", r.detection->bin_width},
                          {"error_histogram", r.detection->error_histogram}};
    }
    return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        EvalReport r;
        r.meta = j.at("meta").get<std::map<std::string, std::string>>();
        r.sources = j.at("sources").get<std::vector<std::string>>();
        r.train_ids = j.at("split").at("train").get<std::vector<std::string>>();
        r.test_ids = j.at("split").at("test").get<std::vector<std::string>>();
        for (const auto& v : j.at("variants")) {
            r.variants.push_back(eval_from(v));
        }
        for (const auto& s : j.at("sweeps")) {
            r.sweeps.push_back(sweep_from(s));
        }
        for (const auto& i : j.at("improvements")) {
            r.improvements.push_back({i.at("column").get<std::string>(), i.at("vp_source").get<std::string>(),
                                      i.at("score").get<std::string>(), i.at("base").get<std::string>(),
                                      i.at("base_mean").get<double>(), i.at("combined_mean").get<double>(),
                                      i.at("sigma").get<double>(), i.at("percent").get<double>()});
        }
        for (const auto& s : j.at("scatter")) {
            r.scatters.push_back({s.at("a").get<std::string>(), s.at("b").get<std::string>(),
                                  s.at("score").get<std::string>(), s.at("above").get<int>(),
                                  s.at("below").get<int>(), s.at("on").get<int>()});
        }
        for (const auto& s : j.at("significance")) {
            SignificanceRecord rec;
            rec.comparison = s.at("comparison").get<std::string>();
            rec.score = s.at("score").get<std::string>();
            rec.mean_a = s.at("mean_a").get<double>();
            rec.mean_b = s.at("mean_b").get<double>();
            rec.t = num_from(s.at("t"));
            rec.df = s.at("df").get<double>();
            rec.p_value = s.at("p_value").get<double>();
            rec.p_welch = s.at("p_welch").get<double>();
            rec.identical = s.at("identical").get<bool>();
            r.significance.push_back(rec);
        }
        if (j.contains("detection")) {
            const auto& d = j.at("detection");
            r.detection = DetectionSummary{d.at("detected").get<int>(), d.at("failed").get<int>(),
                                           d.at("bin_width").get<double>(),
                                           d.at("error_histogram").get<std::vector<int>>()};
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Format, std::string("malformed report: ") + e.what());
    }
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out << report_to_json(report) << '\n';
}

EvalReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return report_from_json(ss.str());
}

std::string render_table(const EvalReport& r) {
    std::vector<std::string> columns;
    const VariantEval* base = nullptr;
    for (const auto& v : r.variants) {
        if (v.variant.name == "model") {
            base = &v;
            columns.push_back("Model");
        }
    }
    for (const auto& s : r.sweeps) {
        if (std::find(columns.begin(), columns.end(), s.column) == columns.end()) {
            columns.push_back(s.column);
        }
    }
    auto find_sweep = [&](const std::string& column, const std::string& source) -> const SweepEntry* {
        for (const auto& s : r.sweeps) {
            if (s.column == column && (s.vp_source == source || s.vp_source.empty())) {
                return &s;
            }
        }
        return nullptr;
    };
    const std::string first_source = r.sources.empty() ? std::string() : r.sources.front();

    std::ostringstream out;
    if (!columns.empty()) {
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> header{"Score", ""};
        header.insert(header.end(), columns.begin(), columns.end());
        rows.push_back(header);
        for (std::size_t si = 0; si < all_scores.size(); ++si) {
            const Score sc = all_scores[si];
            bool first_row = true;
            auto label = [&] {
                const std::string l = first_row ? kScoreNames[si] : "";
                first_row = false;
                return l;
            };
            for (const auto& src : r.sources) {
                std::vector<std::string> row{label(), source_label(src)};
                for (const auto& c : columns) {
                    if (c == "Model" && base != nullptr) {
                        row.push_back(fixed(base->mean.get(sc), 3));
                    } else if (const SweepEntry* s = find_sweep(c, src)) {
                        const std::size_t k = s->result.best_index(sc);
                        row.push_back(fixed(s->result.means[k].get(sc), 3) + " (" + sigma_text(s->result.sigmas[k]) +
                                      ")");
                    } else {
                        row.push_back("-");
                    }
                }
                rows.push_back(row);
            }
            std::vector<std::string> irow{label(), "I"};
            std::vector<std::string> wrow{label(), "W"};
            for (const auto& c : columns) {
                std::string cell = "-";
                for (const auto& imp : r.improvements) {
                    if (imp.column == c && imp.score == to_string(sc) &&
                        (imp.vp_source == first_source || imp.vp_source.empty())) {
                        cell = fixed(imp.percent, 1) + "%";
                        break;
                    }
                }
                irow.push_back(cell);
                std::string w = "-";
                if (const SweepEntry* s = find_sweep(c, first_source); s != nullptr && s->result.variant.recipe.channels.size() > 1) {
                    const auto& ws = s->result.weights[s->result.best_index(sc)];
                    w = "[";
                    for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
                        w += (i ? ", " : "") + fixed(ws[i], 2);
                    }
                    w += "]";
                }
                wrow.push_back(w);
            }
            rows.push_back(irow);
            rows.push_back(wrow);
        }

        std::vector<std::size_t> width(header.size(), 0);
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                width[i] = std::max(width[i], row[i].size());
            }
        }
        auto rule = [&] {
            for (std::size_t i = 0; i < width.size(); ++i) {
                out << std::string(width[i] + 2, '-') << (i + 1 < width.size() ? "+" : "\n");
            }
        };
        for (std::size_t ri = 0; ri < rows.size(); ++ri) {
            if (ri == 1 || (ri > 1 && !rows[ri][0].empty())) {
                rule();
            }
            for (std::size_t i = 0; i < rows[ri].size(); ++i) {
                const auto& cell = rows[ri][i];
                out << ' ' << cell << std::string(width[i] - cell.size() + 1, ' ') << (i + 1 < rows[ri].size() ? "|" : "\n");
            }
        }
        rule();
        out << "Parentheses: sigma at which each score peaks. I: improvement over Model"
            << (first_source.empty() ? "" : " (" + source_label(first_source) + " row)")
            << ". W: learned channel weights at that sigma.\n";
    }

    if (!r.sweeps.empty()) {
        out << "\nBest sigma by summed normalized NSS and CC:\n";
        for (const auto& s : r.sweeps) {
            out << "  " << s.column << (s.vp_source.empty() ? "" : " [" + source_label(s.vp_source) + "]") << ": "
                << sigma_text(s.result.best_combined_sigma) << '\n';
        }
    }
    if (!r.significance.empty()) {
        out << "\nSignificance (two-tailed t-test over split means):\n";
        for (const auto& s : r.significance) {
            char buf[256];
            if (s.identical) {
                std::snprintf(buf, sizeof buf, "  %-4s %s: %.3f vs. %.3f, identical\n", s.score.c_str(),
                              s.comparison.c_str(), s.mean_a, s.mean_b);
            } else {
                std::snprintf(buf, sizeof buf, "  %-4s %s: %.3f vs. %.3f, p=%.3e (Welch p=%.3e)\n",
                              s.score.c_str(), s.comparison.c_str(), s.mean_a, s.mean_b, s.p_value, s.p_welch);
            }
            out << buf;
        }
    }
    if (!r.scatters.empty()) {
        out << "\nPer-image comparison (b above / below / on the diagonal):\n";
        for (const auto& s : r.scatters) {
            out << "  " << s.score << ' ' << s.b << " vs. " << s.a << ": " << s.above << " / " << s.below << " / "
                << s.on << '\n';
        }
    }
    if (r.detection) {
        out << "\nVP detector: " << r.detection->detected << " detected, " << r.detection->failed << " without a VP\n";
        if (!r.detection->error_histogram.empty()) {
            out << "  error histogram (" << sigma_text(r.detection->bin_width) << "px bins):";
            for (int c : r.detection->error_histogram) {
                out << ' ' << c;
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "sigma,auc,nss,cc\n";
    char buf[160];
    for (std::size_t i = 0; i < sweep.sigmas.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%g,%.17g,%.17g,%.17g\n", sweep.sigmas[i], sweep.means[i].auc,
                      sweep.means[i].nss, sweep.means[i].cc);
        out << buf;
    }
    return out.str();
}

}  // namespace vpsal

#include "vpsal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vpsal/error.hpp"
#include "vpsal/image_io.hpp"
#include "vpsal/parallel.hpp"
#include "vpsal/saliency.hpp"

namespace vpsal {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(trim(cell));
    }
    return out;
}

double parse_number(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::Format, where + ": not a number: '" + s + "'");
    }
    return v;
}

}  // namespace

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read manifest " + path.string());
    }
    DatasetManifest m;
    m.base_dir = path.parent_path();
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(lineno);
        ManifestEntry e;
        try {
            const json j = json::parse(t);
            e.image_id = j.at("image_id").get<std::string>();
            e.image_path = j.at("image").get<std::string>();
            if (j.contains("annotation") && !j.at("annotation").is_null()) {
                const auto a = j.at("annotation").get<std::vector<double>>();
                if (a.size() != 2) {
                    throw Error(ErrorCode::Format, where + ": annotation must be [x, y]");
                }
                e.annotation = Point2{a[0], a[1]};
            }
            if (j.contains("fixations") && !j.at("fixations").is_null()) {
                e.fixation_file = j.at("fixations").get<std::string>();
            }
            if (j.contains("maps")) {
                for (const auto& [model, p] : j.at("maps").items()) {
                    e.maps[model] = p.get<std::string>();
                }
            }
        } catch (const json::exception& ex) {
            throw Error(ErrorCode::Format, where + ": malformed manifest row: " + ex.what());
        }
        if (e.image_id.empty()) {
            throw Error(ErrorCode::Format, where + ": empty image_id");
        }
        if (!seen.insert(e.image_id).second) {
            throw Error(ErrorCode::Format, where + ": duplicate image_id " + e.image_id);
        }
        m.entries.push_back(std::move(e));
    }
    if (m.entries.empty()) {
        throw Error(ErrorCode::Data, "manifest " + path.string() + " has no entries");
    }
    return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    for (const auto& e : manifest.entries) {
        json j;
        j["image_id"] = e.image_id;
        j["image"] = e.image_path.generic_string();
        if (e.annotation) {
            j["annotation"] = {e.annotation->x, e.annotation->y};
        }
        if (e.fixation_file) {
            j["fixations"] = e.fixation_file->generic_string();
        }
        if (!e.maps.empty()) {
            json maps = json::object();
            for (const auto& [model, p] : e.maps) {
                maps[model] = p.generic_string();
            }
            j["maps"] = maps;
        }
        out << j.dump() << '\n';
    }
}

FixationFile read_fixation_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read fixation file " + path.string());
    }
    FixationFile f;
    std::string line;
    int lineno = 0;
    bool header = false;
    bool any_observer = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(lineno);
        const auto cells = split_csv(t);
        if (!header) {
            if (cells.size() != 2) {
                throw Error(ErrorCode::Format, where + ": expected header 'width,height'");
            }
            f.original_width = static_cast<int>(parse_number(cells[0], where));
            f.original_height = static_cast<int>(parse_number(cells[1], where));
            if (f.original_width < 1 || f.original_height < 1) {
                throw Error(ErrorCode::Format, where + ": non-positive dimensions");
            }
            header = true;
            continue;
        }
        if (cells.size() != 2 && cells.size() != 3) {
            throw Error(ErrorCode::Format, where + ": expected 'x,y[,observer]'");
        }
        f.fixations.points.push_back({parse_number(cells[0], where), parse_number(cells[1], where)});
        if (cells.size() == 3) {
            if (!any_observer && f.fixations.points.size() > 1) {
                throw Error(ErrorCode::Format, where + ": observer column must be present on every row or none");
            }
            any_observer = true;
            f.fixations.observers.push_back(static_cast<int>(parse_number(cells[2], where)));
        } else if (any_observer) {
            throw Error(ErrorCode::Format, where + ": observer column must be present on every row or none");
        }
    }
    if (!header) {
        throw Error(ErrorCode::Format, path.string() + ": missing header");
    }
    return f;
}

void write_fixation_file(const FixationFile& file, const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out << file.original_width << ',' << file.original_height << '\n';
    char buf[64];
    const auto& fx = file.fixations;
    for (std::size_t i = 0; i < fx.points.size(); ++i) {
        out << std::string(buf, std::to_chars(buf, buf + sizeof buf, fx.points[i].x).ptr) << ','
            << std::string(buf, std::to_chars(buf, buf + sizeof buf, fx.points[i].y).ptr);
        if (!fx.observers.empty()) {
            out << ',' << fx.observers[i];
        }
        out << '\n';
    }
}

Point2 Frame::to_working(Point2 p) const {
    return {(p.x - offset_x) * scale_x(), (p.y - offset_y) * scale_y()};
}

Point2 Frame::to_original(Point2 p) const {
    return {p.x / scale_x() + offset_x, p.y / scale_y() + offset_y};
}

LoadedImage ingest_entry(const DatasetManifest& manifest, const ManifestEntry& entry, const IngestConfig& cfg) {
    const std::string& id = entry.image_id;
    LoadedImage out;
    out.image_id = id;

    const RasterImage original = load_image(manifest.resolve(entry.image_path));
    Crop c{original, 0, 0};
    if (cfg.crop_margins) {
        try {
            c = crop_gray_margins(original, cfg.margin_tolerance);
        } catch (const Error& e) {
            throw Error(e.code(), "image " + id + ": " + e.what());
        }
    }
    out.frame.original_width = original.width();
    out.frame.original_height = original.height();
    out.frame.offset_x = c.offset_x;
    out.frame.offset_y = c.offset_y;
    out.frame.cropped_width = c.image.width();
    out.frame.cropped_height = c.image.height();
    out.image = resize_max_side(c.image, cfg.working_max_side);
    out.frame.width = out.image.width();
    out.frame.height = out.image.height();

    if (entry.annotation) {
        const Point2 a = *entry.annotation;
        if (!(a.x >= 0.0 && a.y >= 0.0 && a.x <= original.width() - 1 && a.y <= original.height() - 1)) {
            throw Error(ErrorCode::Data, "image " + id + ": annotation outside the original image");
        }
        const Point2 w = out.frame.to_working(a);
        if (fixation_pixel(w, out.frame.width, out.frame.height) < 0) {
            throw Error(ErrorCode::Data, "image " + id + ": annotation falls in the cropped margin");
        }
        out.annotation = w;
    }

    if (entry.fixation_file) {
        const FixationFile f = read_fixation_file(manifest.resolve(*entry.fixation_file));
        if (f.original_width != original.width() || f.original_height != original.height()) {
            throw Error(ErrorCode::Data, "image " + id + ": fixation file dimensions " +
                                             std::to_string(f.original_width) + "x" +
                                             std::to_string(f.original_height) + " do not match the image");
        }
        const bool with_obs = !f.fixations.observers.empty();
        for (std::size_t i = 0; i < f.fixations.size(); ++i) {
            const Point2 w = out.frame.to_working(f.fixations.points[i]);
            if (fixation_pixel(w, out.frame.width, out.frame.height) < 0) {
                ++out.dropped_fixations;
                continue;
            }
            out.fixations.points.push_back(w);
            if (with_obs) {
                out.fixations.observers.push_back(f.fixations.observers[i]);
            }
        }
    }

    for (const auto& model : cfg.external_models) {
        const auto it = entry.maps.find(model);
        if (it == entry.maps.end()) {
            throw Error(ErrorCode::Data, "image " + id + ": no map for model " + model);
        }
        const fs::path p = manifest.resolve(it->second);
        const RasterImage raw = load_image(p);
        if (raw.channels() != 1) {
            throw Error(ErrorCode::Format, "external saliency maps must be single-channel: " + p.string());
        }
        ScalarMap m = raw.channel(0);
        // Maps at original resolution share the image's margins.
        if (m.width() == original.width() && m.height() == original.height()) {
            m = crop(m, c.offset_x, c.offset_y, c.image.width(), c.image.height());
        }
        out.external_maps[model] =
            external_channel(m, out.frame.width, out.frame.height, "external:" + p.string()).map;
    }
    return out;
}

std::vector<LoadedImage> ingest(const DatasetManifest& manifest, const IngestConfig& cfg, const LogFn& log,
                                int jobs) {
    if (manifest.entries.empty()) {
        throw Error(ErrorCode::Data, "manifest has no entries");
    }
    std::vector<const ManifestEntry*> order;
    for (const auto& e : manifest.entries) {
        order.push_back(&e);
    }
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->image_id < b->image_id; });

    std::vector<LoadedImage> out(order.size());
    parallel_for(order.size(), jobs, [&](std::size_t i) { out[i] = ingest_entry(manifest, *order[i], cfg); });
    if (log) {
        for (const auto& im : out) {
            if (im.dropped_fixations > 0) {
                log("image " + im.image_id + ": dropped " + std::to_string(im.dropped_fixations) +
                    " fixations outside the working frame");
            }
        }
    }
    return out;
}

}  // namespace vpsal

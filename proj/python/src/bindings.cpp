#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vpsal/combine.hpp"
#include "vpsal/image_io.hpp"
#include "vpsal/metrics.hpp"
#include "vpsal/pipeline.hpp"
#include "vpsal/saliency.hpp"
#include "vpsal/stats.hpp"
#include "vpsal/vpdetect.hpp"

namespace py = pybind11;
using namespace vpsal;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const ScalarMap& m) {
    Array out({m.height(), m.width()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

ScalarMap to_map(const Array& a) {
    if (a.ndim() != 2) {
        throw Error(ErrorCode::InvalidArgument, "expected a 2-D array");
    }
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    return ScalarMap(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array image_to_array(const RasterImage& img) {
    std::vector<py::ssize_t> shape{img.height(), img.width()};
    if (img.channels() == 3) {
        shape.push_back(3);
    }
    Array out(shape);
    std::copy(img.values().begin(), img.values().end(), out.mutable_data());
    return out;
}

// (H, W) gray or (H, W, 3) RGB, values in [0, 1].
RasterImage to_image(const Array& a) {
    if (a.ndim() != 2 && !(a.ndim() == 3 && a.shape(2) == 3)) {
        throw Error(ErrorCode::InvalidArgument, "expected an (H, W) or (H, W, 3) array");
    }
    const int c = a.ndim() == 3 ? 3 : 1;
    return RasterImage(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), c,
                       std::vector<double>(a.data(), a.data() + a.size()));
}

FixationSet to_fixations(const Array& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) {
        throw Error(ErrorCode::InvalidArgument, "fixations must be an (N, 2) array of x, y");
    }
    FixationSet f;
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        f.points.push_back({a.at(i, 0), a.at(i, 1)});
    }
    return f;
}

GaussianForm parse_form(const std::string& s) {
    if (s == "4sigma2") {
        return GaussianForm::FourSigmaSq;
    }
    if (s == "2sigma2") {
        return GaussianForm::TwoSigmaSq;
    }
    throw Error(ErrorCode::InvalidArgument, "gaussian form must be 4sigma2 or 2sigma2");
}

py::dict ttest_dict(const TTest& t) {
    py::dict d;
    d["mean_a"] = t.mean_a;
    d["mean_b"] = t.mean_b;
    d["t"] = t.t;
    d["df"] = t.df;
    d["p"] = t.p;
    d["identical"] = t.identical;
    return d;
}

RunConfig make_config(const std::string& json_text) {
    RunConfig c;
    if (!json_text.empty()) {
        apply_config(c, json_text);
    }
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<Error>(m, "VpsalError", PyExc_RuntimeError);
    // Registered later, so consulted first.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InvalidArgument) {
                throw;
            }
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("load_image", [](const std::filesystem::path& p) { return image_to_array(load_image(p)); }, py::arg("path"));
    m.def("save_map", [](const Array& a, const std::filesystem::path& p) { save_map(to_map(a), p); }, py::arg("map"),
          py::arg("path"));

    m.def("builtin_saliency", [](const Array& img) { return to_array(builtin_saliency(to_image(img)).map); },
          py::arg("image"));

    m.def(
        "detect_vp",
        [](const Array& img) {
            const VpEstimate e = detect_vp(to_image(img));
            return py::make_tuple(e.location.x, e.location.y, e.support);
        },
        py::arg("image"), "Returns (x, y, support); raises VpsalError when no VP is found.");
    m.def(
        "vp_gaussian",
        [](int w, int h, double x, double y, double sigma, const std::string& form) {
            return to_array(vp_gaussian(w, h, {x, y}, sigma, parse_form(form)));
        },
        py::arg("width"), py::arg("height"), py::arg("x"), py::arg("y"), py::arg("sigma"),
        py::arg("form") = "4sigma2");
    m.def(
        "center_gaussian",
        [](int w, int h, double sigma, const std::string& form) {
            return to_array(center_gaussian(w, h, sigma, parse_form(form)));
        },
        py::arg("width"), py::arg("height"), py::arg("sigma"), py::arg("form") = "4sigma2");

    m.def(
        "density_map",
        [](const Array& fix, int w, int h, double sigma_fix) {
            return to_array(density_map(to_fixations(fix), w, h, sigma_fix));
        },
        py::arg("fixations"), py::arg("width"), py::arg("height"), py::arg("sigma_fix") = 10.0);
    m.def("auc", [](const Array& s, const Array& f) { return auc(to_map(s), to_fixations(f)); }, py::arg("salmap"),
          py::arg("fixations"));
    m.def("nss", [](const Array& s, const Array& f) { return nss(to_map(s), to_fixations(f)); }, py::arg("salmap"),
          py::arg("fixations"));
    m.def("cc", [](const Array& a, const Array& b) { return cc(to_map(a), to_map(b)); }, py::arg("a"), py::arg("b"));

    m.def(
        "train_linear_svm",
        [](const Array& x, const std::vector<int>& y, double c, int epochs, std::uint64_t seed) {
            if (x.ndim() != 2 || static_cast<std::size_t>(x.shape(0)) != y.size()) {
                throw Error(ErrorCode::InvalidArgument, "features must be (N, k) with N labels");
            }
            std::vector<TrainingSample> s;
            for (py::ssize_t i = 0; i < x.shape(0); ++i) {
                TrainingSample t;
                t.features.assign(x.data(i, 0), x.data(i, 0) + x.shape(1));
                t.label = y[static_cast<std::size_t>(i)] > 0 ? Label::Positive : Label::Negative;
                s.push_back(std::move(t));
            }
            SvmParams p;
            p.C = c;
            p.epochs = epochs;
            p.seed = seed;
            const LinearCombiner model = train_linear_svm(s, p);
            return py::make_tuple(model.weights, model.bias);
        },
        py::arg("features"), py::arg("labels"), py::arg("C") = 1.0, py::arg("epochs") = 200, py::arg("seed") = 0,
        "Returns (weights, bias).");
    m.def(
        "score_map",
        [](const std::vector<double>& weights, double bias, const std::vector<Array>& channels) {
            LinearCombiner model;
            model.weights = weights;
            model.bias = bias;
            std::vector<ScalarMap> ch;
            for (const auto& a : channels) {
                ch.push_back(to_map(a));
            }
            return to_array(score_map(model, ch));
        },
        py::arg("weights"), py::arg("bias"), py::arg("channels"));

    m.def("improvement", &improvement, py::arg("base_mean"), py::arg("combined_mean"));
    m.def(
        "paired_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) { return ttest_dict(paired_t_test(a, b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "write_synthetic_corpus",
        [](const std::filesystem::path& dir, int n_images, int width, int height, std::uint64_t seed, int jobs) {
            CorpusSpec spec;
            spec.n_images = n_images;
            spec.width = width;
            spec.height = height;
            spec.seed = seed;
            return write_synthetic_corpus(spec, dir, jobs);
        },
        py::arg("dir"), py::arg("n_images") = 100, py::arg("width") = 400, py::arg("height") = 300,
        py::arg("seed") = 1, py::arg("jobs") = 1, "Returns the manifest path.");
    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const RunConfig c = make_config(config_json);
            py::gil_scoped_release release;
            return report_to_json(cmd_experiment(c));
        },
        py::arg("config_json"), "Runs the full experiment; returns the report as JSON text.");
    m.def("render_table", [](const std::string& report_json) { return render_table(report_from_json(report_json)); },
          py::arg("report_json"));
    m.def("default_config", [] { return config_to_json(RunConfig{}); });
}

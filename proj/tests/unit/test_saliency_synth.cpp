#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "vpsal/error.hpp"
#include "vpsal/image_io.hpp"
#include "vpsal/saliency.hpp"
#include "vpsal/synth.hpp"

using namespace vpsal;

TEST_CASE("builtin saliency spans [0,1] at the input size") {
    RasterImage img(160, 120, 3, 0.5);
    for (int y = 50; y < 70; ++y) {
        for (int x = 100; x < 120; ++x) {
            img.at(x, y, 0) = 0.95;
            img.at(x, y, 1) = 0.2;
            img.at(x, y, 2) = 0.2;
        }
    }
    const SaliencyChannel s = builtin_saliency(img);
    CHECK(s.provenance == "builtin");
    REQUIRE(s.map.width() == 160);
    REQUIRE(s.map.height() == 120);
    const auto [lo, hi] = std::minmax_element(s.map.values().begin(), s.map.values().end());
    CHECK(*lo == 0.0);
    CHECK(*hi == 1.0);
    // The lone red patch stands out against the flat gray field.
    const auto peak = std::distance(s.map.values().begin(), hi);
    const int px = static_cast<int>(peak % 160);
    const int py = static_cast<int>(peak / 160);
    CHECK(std::hypot(px - 110.0, py - 60.0) < 20.0);
    CHECK(s.map(110, 60) > s.map(20, 20));
}

TEST_CASE("builtin saliency of a flat image is all zeros") {
    const SaliencyChannel s = builtin_saliency(RasterImage(100, 80, 3, 0.3));
    for (double v : s.map.values()) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("builtin saliency is deterministic and validates its config") {
    const Scene sc = gen_scene(SceneSpec{});
    CHECK(builtin_saliency(sc.image).map == builtin_saliency(sc.image).map);
    SaliencyConfig c;
    c.levels = 1;
    CHECK_THROWS_AS(builtin_saliency(sc.image, c), Error);
}

TEST_CASE("external maps are resized bilinearly and normalized") {
    ScalarMap m(4, 2, std::vector<double>{2, 2, 4, 4, 2, 2, 4, 4});
    const SaliencyChannel s = external_channel(m, 8, 4, "external:test");
    CHECK(s.map.width() == 8);
    CHECK(s.map.height() == 4);
    CHECK(s.map(0, 0) == 0.0);
    CHECK(s.map(7, 3) == 1.0);
    testutil::TempDir dir("ext");
    save_map(normalize_minmax(m), dir.path / "m.png");
    const SaliencyChannel l = load_external_map(dir.path / "m.png", 8, 4);
    for (std::size_t i = 0; i < l.map.size(); ++i) {
        CHECK(l.map.values()[i] == doctest::Approx(s.map.values()[i]).epsilon(1e-9));
    }
    CHECK(l.provenance.rfind("external:", 0) == 0);
}

TEST_CASE("scenes are deterministic per seed") {
    SceneSpec spec;
    spec.seed = 5;
    spec.distractors = {{{60, 60}, 12.0, 1.0}};
    const Scene a = gen_scene(spec);
    const Scene b = gen_scene(spec);
    CHECK(a.image == b.image);
    CHECK(a.ray_angles == b.ray_angles);
    spec.seed = 6;
    CHECK(!(gen_scene(spec).image == a.image));
    CHECK(a.ray_angles.size() == 6);
    CHECK(a.object_map(60, 60) > 0.0);
    CHECK(a.object_map(300, 250) == 0.0);
}

TEST_CASE("scene rays separate sectors with the requested contrast") {
    SceneSpec spec;
    spec.texture = 0.0;
    spec.n_lines = 4;
    const Scene sc = gen_scene(spec);
    std::set<long> levels;
    for (double v : sc.image.values()) {
        levels.insert(std::lround(v * 1000.0));
    }
    // Two sector shades (plus anti-aliased pixels on the rays).
    CHECK(levels.size() >= 2);
    spec.vp_true = {500, 10};
    CHECK_THROWS_AS(gen_scene(spec), Error);
    spec = {};
    spec.n_lines = 1;
    CHECK_THROWS_AS(gen_scene(spec), Error);
}

TEST_CASE("fixation sampler follows its mixture") {
    FixationModel m;
    m.vp_weight = 1.0;
    m.saliency_weight = 0.0;
    m.uniform_weight = 0.0;
    m.sigma_vp_true = 10.0;
    m.n_fixations = 2000;
    m.seed = 3;
    const FixationSet f = gen_fixations(400, 300, m, {200, 150}, nullptr);
    REQUIRE(f.size() == 2000);
    double sx = 0.0;
    double sy = 0.0;
    double r2 = 0.0;
    for (const auto& p : f.points) {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= 399.0);
        sx += p.x;
        sy += p.y;
        r2 += (p.x - 200) * (p.x - 200) + (p.y - 150) * (p.y - 150);
    }
    CHECK(sx / 2000 == doctest::Approx(200.0).epsilon(0.01));
    CHECK(sy / 2000 == doctest::Approx(150.0).epsilon(0.01));
    // Per-axis variance sigma^2, so the mean squared radius is 2 sigma^2.
    CHECK(r2 / 2000 == doctest::Approx(200.0).epsilon(0.1));

    ScalarMap sal(400, 300, 0.0);
    sal(17, 23) = 1.0;
    m.vp_weight = 0.0;
    m.saliency_weight = 1.0;
    const FixationSet g = gen_fixations(400, 300, m, {200, 150}, &sal);
    for (const auto& p : g.points) {
        CHECK(p.x == 17.0);
        CHECK(p.y == 23.0);
    }
    m.uniform_weight = 0.5;
    CHECK_THROWS_AS(gen_fixations(400, 300, m, {200, 150}, &sal), Error);
}

TEST_CASE("corpus generation is deterministic and keeps VPs inside the margin") {
    CorpusSpec spec;
    spec.n_images = 6;
    spec.seed = 9;
    const auto a = gen_corpus(spec);
    const auto b = gen_corpus(spec);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].image_id == b[i].image_id);
        CHECK(a[i].scene.image == b[i].scene.image);
        CHECK(a[i].fixations.points.size() == b[i].fixations.points.size());
        CHECK(a[i].fixations.points[3].x == b[i].fixations.points[3].x);
        const auto& vp = a[i].scene.vp_true;
        CHECK(vp.x >= 0.2 * spec.width);
        CHECK(vp.x <= 0.8 * spec.width);
        CHECK(vp.y >= 0.2 * spec.height);
        CHECK(vp.y <= 0.8 * spec.height);
        CHECK(static_cast<int>(a[i].fixations.size()) == spec.fixations.n_fixations);
    }
    CHECK(a[0].image_id == "synth_0000");
    spec.seed = 10;
    CHECK(!(gen_corpus(spec)[0].scene.image == a[0].scene.image));
}

TEST_CASE("mix_seed derives distinct streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 4; ++s) {
        for (std::uint64_t k = 0; k < 64; ++k) {
            seen.insert(mix_seed(s, k));
        }
    }
    CHECK(seen.size() == 256);
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
}

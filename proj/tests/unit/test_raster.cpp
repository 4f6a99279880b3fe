#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "vpsal/error.hpp"
#include "vpsal/image_io.hpp"
#include "vpsal/raster.hpp"

using namespace vpsal;

TEST_CASE("grayscale uses the luma weights") {
    RasterImage rgb(1, 1, 3, std::vector<double>{1.0, 0.5, 0.25});
    const RasterImage g = to_grayscale(rgb);
    CHECK(g.channels() == 1);
    CHECK(g.at(0, 0) == doctest::Approx(0.299 + 0.587 * 0.5 + 0.114 * 0.25));
}

TEST_CASE("bilinear resize stays within the input range and keeps constants") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScalarMap m(13, 7);
    for (double& v : m.values()) {
        v = u(rng);
    }
    const auto [lo, hi] = std::minmax_element(m.values().begin(), m.values().end());
    for (auto [w, h] : {std::pair{5, 3}, std::pair{40, 21}, std::pair{13, 7}}) {
        const ScalarMap r = resize_bilinear(m, w, h);
        CHECK(r.width() == w);
        CHECK(r.height() == h);
        for (double v : r.values()) {
            CHECK(v >= *lo - 1e-12);
            CHECK(v <= *hi + 1e-12);
        }
    }
    CHECK(resize_bilinear(m, 13, 7) == m);
    const ScalarMap c = resize_bilinear(ScalarMap(9, 4, 0.25), 17, 30);
    for (double v : c.values()) {
        CHECK(v == doctest::Approx(0.25));
    }
}

TEST_CASE("bilinear upsampling by two interpolates at quarter offsets") {
    ScalarMap m(2, 1, std::vector<double>{0.0, 1.0});
    const ScalarMap r = resize_bilinear(m, 4, 1);
    // Output centers map to input x = -0.25, 0.25, 0.75, 1.25 (edge-clamped).
    CHECK(r(0, 0) == doctest::Approx(0.0));
    CHECK(r(1, 0) == doctest::Approx(0.25));
    CHECK(r(2, 0) == doctest::Approx(0.75));
    CHECK(r(3, 0) == doctest::Approx(1.0));
}

TEST_CASE("max side dims") {
    CHECK(max_side_dims(1920, 1080, 400) == std::pair{400, 225});
    CHECK(max_side_dims(1080, 1920, 400) == std::pair{225, 400});
    CHECK(max_side_dims(400, 300, 400) == std::pair{400, 300});
    CHECK(max_side_dims(100, 50, 400) == std::pair{400, 200});
}

TEST_CASE("gray margins are cropped and offsets reported") {
    RasterImage img(20, 10, 1, 0.5);
    for (int y = 2; y < 8; ++y) {
        for (int x = 3; x < 15; ++x) {
            img.at(x, y) = (x + y) % 2 ? 0.1 : 0.9;
        }
    }
    const Crop c = crop_gray_margins(img);
    CHECK(c.offset_x == 3);
    CHECK(c.offset_y == 2);
    CHECK(c.image.width() == 12);
    CHECK(c.image.height() == 6);
    CHECK(c.image.at(0, 0) == img.at(3, 2));
    CHECK_THROWS_AS(crop_gray_margins(RasterImage(5, 5, 1, 0.5)), Error);
}

TEST_CASE("margin rows within tolerance are still margins") {
    RasterImage img(10, 10, 1, 0.0);
    for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) {
            img.at(x, y) = (y == 0 || y == 9) ? 0.3 + ((x % 2) ? 1.0 / 255.0 : 0.0) : (x * 7 + y * 3) % 10 / 10.0;
        }
    }
    const Crop c = crop_gray_margins(img, 2.0 / 255.0);
    CHECK(c.offset_y == 1);
    CHECK(c.image.height() == 8);
}

TEST_CASE("min-max normalization") {
    ScalarMap m(3, 1, std::vector<double>{2.0, 4.0, 3.0});
    const ScalarMap n = normalize_minmax(m);
    CHECK(n(0, 0) == 0.0);
    CHECK(n(1, 0) == 1.0);
    CHECK(n(2, 0) == 0.5);
    const ScalarMap z = normalize_minmax(ScalarMap(3, 3, 7.0));
    for (double v : z.values()) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("gaussian blur") {
    ScalarMap m(21, 21, 0.0);
    m(10, 10) = 1.0;
    CHECK(gaussian_blur(m, 0.0) == m);
    const ScalarMap b = gaussian_blur(m, 2.0, 4.0, Border::Zero);
    double sum = 0.0;
    for (double v : b.values()) {
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(b(10, 10) > b(11, 10));
    CHECK(b(12, 10) / b(10, 10) == doctest::Approx(std::exp(-0.5)).epsilon(1e-3));
    CHECK(b(8, 10) == doctest::Approx(b(12, 10)));
}

TEST_CASE("bilinear sampling") {
    ScalarMap m(2, 2, std::vector<double>{0.0, 1.0, 2.0, 3.0});
    CHECK(sample_bilinear(m, 0.5, 0.5) == doctest::Approx(1.5));
    CHECK(sample_bilinear(m, 1.0, 0.0) == 1.0);
    CHECK(sample_bilinear(m, -3.0, 0.0) == 0.0);
    CHECK(sample_bilinear(m, 0.25, 1.0) == doctest::Approx(2.25));
}

TEST_CASE("crop") {
    RasterImage img(4, 3, 3);
    img.at(2, 1, 1) = 0.7;
    const RasterImage c = crop(img, 1, 1, 2, 2);
    CHECK(c.at(1, 0, 1) == 0.7);
    CHECK_THROWS_AS(crop(img, 3, 0, 2, 1), Error);
}

TEST_CASE("16-bit map round trip through PNG and PGM") {
    testutil::TempDir dir("io");
    ScalarMap m(5, 3);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.values()[i] = static_cast<double>(i) / 14.0;
    }
    for (const char* name : {"m.png", "m.pgm"}) {
        save_map(m, dir.path / name);
        const RasterImage back = load_image(dir.path / name);
        REQUIRE(back.channels() == 1);
        for (std::size_t i = 0; i < m.size(); ++i) {
            CHECK(std::abs(back.values()[i] - m.values()[i]) <= 0.5 / 65535.0 + 1e-12);
        }
    }
}

TEST_CASE("8-bit color round trip") {
    testutil::TempDir dir("io8");
    RasterImage img(3, 2, 3);
    for (std::size_t i = 0; i < img.values().size(); ++i) {
        img.values()[i] = static_cast<double>(i * 13 % 256) / 255.0;
    }
    for (const char* name : {"c.png", "c.ppm"}) {
        save_image(img, dir.path / name);
        const RasterImage back = load_image(dir.path / name);
        REQUIRE(back.channels() == 3);
        for (std::size_t i = 0; i < img.values().size(); ++i) {
            CHECK(back.values()[i] == doctest::Approx(img.values()[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("loading a missing or malformed file fails cleanly") {
    testutil::TempDir dir("bad");
    CHECK_THROWS_AS(load_image(dir.path / "missing.png"), Error);
    {
        std::ofstream(dir.path / "junk.png") << "not an image";
    }
    CHECK_THROWS_AS(load_image(dir.path / "junk.png"), Error);
}

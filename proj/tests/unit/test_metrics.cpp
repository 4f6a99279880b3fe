#include <cmath>
#include <random>

#include "doctest.h"
#include "vpsal/error.hpp"
#include "vpsal/fixations.hpp"
#include "vpsal/metrics.hpp"

using namespace vpsal;

namespace {

// O(n^2) pair counting over fixated vs never-fixated pixels.
double brute_auc(const ScalarMap& m, const FixationSet& fix) {
    std::vector<double> pos;
    std::vector<bool> hit(m.size(), false);
    for (const auto& p : fix.points) {
        const int x = static_cast<int>(std::lround(p.x));
        const int y = static_cast<int>(std::lround(p.y));
        pos.push_back(m(x, y));
        hit[m.index(x, y)] = true;
    }
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (hit[i]) {
            continue;
        }
        for (double v : pos) {
            const double n = m.values()[i];
            wins += v > n ? 1.0 : (v == n ? 0.5 : 0.0);
            pairs += 1.0;
        }
    }
    return wins / pairs;
}

struct RandomCase {
    ScalarMap map;
    FixationSet fix;
};

RandomCase random_case(std::mt19937_64& rng, bool coarse) {
    std::uniform_int_distribution<int> side(2, 8);
    const int w = side(rng);
    const int h = side(rng);
    ScalarMap m(w, h);
    std::uniform_int_distribution<int> level(0, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : m.values()) {
        v = coarse ? level(rng) / 4.0 : u(rng);
    }
    std::uniform_int_distribution<int> nfix(1, std::min(10, w * h - 1));
    const int k = nfix(rng);
    FixationSet fix;
    std::uniform_int_distribution<int> px(0, w - 1);
    std::uniform_int_distribution<int> py(0, h - 1);
    for (int i = 0; i < k; ++i) {
        fix.points.push_back({static_cast<double>(px(rng)), static_cast<double>(py(rng))});
    }
    return {m, fix};
}

}  // namespace

TEST_CASE("auc equals brute-force pair counting, ties included") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = random_case(rng, trial % 2 == 0);
        // Skip the rare case where every pixel is fixated.
        std::vector<bool> hit(c.map.size(), false);
        for (const auto& p : c.fix.points) {
            hit[c.map.index(static_cast<int>(p.x), static_cast<int>(p.y))] = true;
        }
        if (std::all_of(hit.begin(), hit.end(), [](bool b) { return b; })) {
            continue;
        }
        CHECK(std::abs(auc(c.map, c.fix) - brute_auc(c.map, c.fix)) <= 1e-12);
    }
}

TEST_CASE("auc keeps duplicate fixations as separate positives") {
    ScalarMap m(3, 1, std::vector<double>{0.0, 0.5, 1.0});
    FixationSet f;
    f.points = {{2, 0}, {2, 0}, {0, 0}};
    // Positives {1, 1, 0}, negative {0.5}: wins 1 + 1 + 0 over 3 pairs.
    CHECK(auc(m, f) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("auc of a constant map is one half") {
    ScalarMap m(4, 4, 0.3);
    FixationSet f;
    f.points = {{1, 1}, {2, 3}};
    CHECK(auc(m, f) == 0.5);
}

TEST_CASE("nss fixtures") {
    ScalarMap m(2, 2, std::vector<double>{0.0, 1.0, 2.0, 3.0});
    FixationSet f;
    f.points = {{1, 1}};
    CHECK(std::abs(nss(m, f) - 1.3416407864998738) <= 1e-12);
    f.points = {{0.5, 0.0}};
    CHECK(std::abs(nss(m, f) - -0.8944271909999159) <= 1e-12);
    f.points = {{1, 1}, {0.5, 0.0}};
    CHECK(std::abs(nss(m, f) - (1.3416407864998738 - 0.8944271909999159) / 2.0) <= 1e-12);
}

TEST_CASE("cc fixture and self-correlation") {
    ScalarMap a(2, 2, std::vector<double>{1, 2, 3, 4});
    ScalarMap b(2, 2, std::vector<double>{2, 4, 5, 9});
    CHECK(std::abs(cc(a, b) - 0.9647638212377321) <= 1e-12);
    CHECK(std::abs(cc(a, a) - 1.0) <= 1e-12);
    ScalarMap neg(2, 2, std::vector<double>{-1, -2, -3, -4});
    CHECK(std::abs(cc(a, neg) + 1.0) <= 1e-12);
}

TEST_CASE("metrics reject mismatched or degenerate input") {
    ScalarMap a(2, 2, 1.0);
    ScalarMap b(3, 2, 1.0);
    CHECK_THROWS_AS(cc(a, b), Error);
    FixationSet none;
    CHECK_THROWS_AS(auc(a, none), Error);
    CHECK_THROWS_AS(nss(a, none), Error);
}

TEST_CASE("auc is invariant under strictly monotone transforms") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = random_case(rng, trial % 3 == 0);
        ScalarMap t = c.map;
        const int kind = pick(rng);
        for (double& v : t.values()) {
            v = kind == 0 ? std::exp(3.0 * v) : kind == 1 ? v * v * v + v : std::log1p(v) - 7.0;
        }
        std::vector<bool> hit(c.map.size(), false);
        for (const auto& p : c.fix.points) {
            hit[c.map.index(static_cast<int>(p.x), static_cast<int>(p.y))] = true;
        }
        if (std::all_of(hit.begin(), hit.end(), [](bool b) { return b; })) {
            continue;
        }
        CHECK(std::abs(auc(t, c.fix) - auc(c.map, c.fix)) <= 1e-9);
    }
}

TEST_CASE("nss and cc are invariant under positive affine transforms") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    std::uniform_real_distribution<double> sub(-0.5, 0.49);
    for (int trial = 0; trial < 100; ++trial) {
        auto c = random_case(rng, false);
        for (auto& p : c.fix.points) {
            p.x = std::clamp(p.x + sub(rng), 0.0, c.map.width() - 1.0);
            p.y = std::clamp(p.y + sub(rng), 0.0, c.map.height() - 1.0);
        }
        const double a = scale(rng);
        const double b = shift(rng);
        ScalarMap t = c.map;
        for (double& v : t.values()) {
            v = a * v + b;
        }
        ScalarMap other = c.map;
        std::shuffle(other.values().begin(), other.values().end(), rng);
        CHECK(std::abs(nss(t, c.fix) - nss(c.map, c.fix)) <= 1e-9);
        CHECK(std::abs(cc(t, other) - cc(c.map, other)) <= 1e-9);
    }
}

TEST_CASE("density map peaks at an isolated fixation and is symmetric") {
    FixationSet f;
    f.points = {{30, 20}};
    const ScalarMap d = density_map(f, 61, 41, 5.0);
    CHECK(d(30, 20) == 1.0);
    CHECK(std::abs(d(25, 20) - d(35, 20)) <= 1e-12);
    CHECK(std::abs(d(30, 15) - d(30, 25)) <= 1e-12);
    CHECK(std::abs(d(35, 20) - std::exp(-0.5)) <= 1e-6);
    // Truncated at 4 sigma.
    CHECK(d(0, 20) == 0.0);
    CHECK(d(30, 0) > 0.0);
}

TEST_CASE("fixation mask radius") {
    FixationSet f;
    f.points = {{5.4, 5.6}};
    CHECK(fixation_pixel(f.points[0], 10, 10) == 6 * 10 + 5);
    CHECK(fixation_pixel({-0.6, 0}, 10, 10) == -1);
    const BinaryMap m0 = fixation_mask(f, 10, 10, 0);
    CHECK(std::count(m0.values().begin(), m0.values().end(), 1) == 1);
    const BinaryMap m1 = fixation_mask(f, 10, 10, 1);
    CHECK(std::count(m1.values().begin(), m1.values().end(), 1) == 5);
    const BinaryMap m2 = fixation_mask(f, 10, 10, 2);
    CHECK(std::count(m2.values().begin(), m2.values().end(), 1) == 13);
}

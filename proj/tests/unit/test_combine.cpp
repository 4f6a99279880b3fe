#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "vpsal/combine.hpp"
#include "vpsal/error.hpp"

using namespace vpsal;

namespace {

TrainingSample sample(std::vector<double> f, Label l) { return {std::move(f), l, "img"}; }

// Two blobs separated along the first feature with margin; second feature is noise.
std::vector<TrainingSample> separable(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    std::vector<TrainingSample> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(sample({1.0 + noise(rng), noise(rng)}, Label::Positive));
        out.push_back(sample({-1.0 + noise(rng), noise(rng)}, Label::Negative));
    }
    return out;
}

// Coarse-to-fine grid search over (w1, w2, b); an independent minimizer of the primal objective.
double grid_minimum(const std::vector<TrainingSample>& s, double C) {
    double best = std::numeric_limits<double>::infinity();
    double cw1 = 0.0;
    double cw2 = 0.0;
    double cb = 0.0;
    double step = 0.5;
    for (int round = 0; round < 12; ++round) {
        double bw1 = cw1;
        double bw2 = cw2;
        double bb = cb;
        for (int i = -8; i <= 8; ++i) {
            for (int j = -8; j <= 8; ++j) {
                for (int k = -8; k <= 8; ++k) {
                    const double w1 = cw1 + i * step;
                    const double w2 = cw2 + j * step;
                    const double b = cb + k * step;
                    const std::vector<double> w{w1, w2};
                    const double f = svm_objective(w, b, s, C);
                    if (f < best) {
                        best = f;
                        bw1 = w1;
                        bw2 = w2;
                        bb = b;
                    }
                }
            }
        }
        cw1 = bw1;
        cw2 = bw2;
        cb = bb;
        step /= 2.5;
    }
    return best;
}

}  // namespace

TEST_CASE("symmetric one-dimensional problem has the known optimum") {
    // With +-1 points the optimum is w = 1, b = 0, objective 0.5 whenever 2nC >= 1.
    std::vector<TrainingSample> s;
    for (int i = 0; i < 10; ++i) {
        s.push_back(sample({1.0}, Label::Positive));
        s.push_back(sample({-1.0}, Label::Negative));
    }
    SvmParams p;
    p.C = 1.0;
    p.epochs = 300;
    const LinearCombiner m = train_linear_svm(s, p);
    CHECK(m.weights[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(m.bias) < 0.05);
    CHECK(svm_objective(m.weights, m.bias, s, p.C) <= 0.5 * 1.05);
}

TEST_CASE("trained objective is close to a grid-search minimum") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<TrainingSample> s;
    for (int i = 0; i < 60; ++i) {
        const double a = g(rng);
        const double b = g(rng);
        // Overlapping classes so the hinge term is active.
        const bool pos = a + 0.5 * b + 0.7 * g(rng) > 0.0;
        s.push_back(sample({a, b}, pos ? Label::Positive : Label::Negative));
    }
    for (double C : {0.05, 1.0}) {
        SvmParams p;
        p.C = C;
        p.epochs = 400;
        const LinearCombiner m = train_linear_svm(s, p);
        const double oracle = grid_minimum(s, C);
        const double got = svm_objective(m.weights, m.bias, s, C);
        CHECK(got >= oracle - 1e-6);
        CHECK(got <= oracle * 1.03);
    }
}

TEST_CASE("separable data is classified perfectly and the noise channel gets little weight") {
    const auto s = separable(3, 50);
    SvmParams p;
    const LinearCombiner m = train_linear_svm(s, p);
    int correct = 0;
    for (const auto& x : s) {
        correct += (m.decision(x.features) > 0.0) == (x.label == Label::Positive) ? 1 : 0;
    }
    CHECK(correct == static_cast<int>(s.size()));
    CHECK(std::abs(m.weights[1]) < 0.2 * std::abs(m.weights[0]));
}

TEST_CASE("identical seeds give bit-identical weights") {
    const auto s = separable(9, 40);
    SvmParams p;
    p.seed = 42;
    const LinearCombiner a = train_linear_svm(s, p);
    const LinearCombiner b = train_linear_svm(s, p);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    p.seed = 43;
    const LinearCombiner c = train_linear_svm(s, p);
    CHECK(c.weights != a.weights);
}

TEST_CASE("running-average objective does not increase across epoch deciles") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<TrainingSample> s;
        for (int i = 0; i < 100; ++i) {
            const double a = g(rng);
            s.push_back(sample({a, g(rng)}, a + g(rng) > 0 ? Label::Positive : Label::Negative));
        }
        SvmParams p;
        p.seed = seed;
        TrainingTrace trace;
        train_linear_svm(s, p, &trace);
        REQUIRE(trace.epoch_objective.size() == 200);
        std::vector<double> decile;
        for (int d = 0; d < 10; ++d) {
            double sum = 0.0;
            for (int e = 0; e < 20; ++e) {
                sum += trace.epoch_objective[d * 20 + e];
            }
            decile.push_back(sum / 20.0);
        }
        for (int d = 1; d < 10; ++d) {
            CHECK(decile[d] <= decile[d - 1] * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("training input validation") {
    SvmParams p;
    CHECK_THROWS_AS(train_linear_svm({}, p), Error);
    CHECK_THROWS_AS(train_linear_svm({sample({1.0}, Label::Positive)}, p), Error);
    CHECK_THROWS_AS(train_linear_svm({sample({1.0}, Label::Positive), sample({1.0, 2.0}, Label::Negative)}, p),
                    Error);
    p.C = 0.0;
    CHECK_THROWS_AS(train_linear_svm(separable(1, 3), p), Error);
}

TEST_CASE("score map is invariant under positive scaling and shifting of the combiner") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScalarMap> ch(2, ScalarMap(12, 9));
    for (auto& c : ch) {
        for (double& v : c.values()) {
            v = u(rng);
        }
    }
    LinearCombiner m;
    m.weights = {0.7, -0.3};
    m.bias = 0.2;
    const ScalarMap base = score_map(m, ch);
    for (auto [alpha, k] : {std::pair{3.0, -5.0}, std::pair{0.01, 100.0}, std::pair{42.0, 0.0}}) {
        LinearCombiner t = m;
        for (double& w : t.weights) {
            w *= alpha;
        }
        t.bias = alpha * m.bias + k;
        const ScalarMap s = score_map(t, ch);
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(std::abs(s.values()[i] - base.values()[i]) <= 1e-10);
        }
    }
    const auto [lo, hi] = std::minmax_element(base.values().begin(), base.values().end());
    CHECK(*lo == 0.0);
    CHECK(*hi == 1.0);
}

TEST_CASE("sampling draws fixated positives and never-fixated negatives") {
    ScalarMap a(10, 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a.values()[i] = static_cast<double>(i);
    }
    FixationSet fix;
    fix.points = {{2, 3}, {7, 7}, {5, 5}};
    SamplingParams p;
    p.n_pos = 3;
    p.n_neg = 20;
    p.seed = 4;
    const std::vector<ScalarMap> ch{a};
    const auto s = sample_training("img7", ch, fix, p);
    REQUIRE(s.size() == 23);
    int pos = 0;
    std::set<double> neg_values;
    for (const auto& x : s) {
        CHECK(x.image_id == "img7");
        if (x.label == Label::Positive) {
            ++pos;
            const double v = x.features[0];
            CHECK((v == 32.0 || v == 77.0 || v == 55.0));
        } else {
            CHECK(x.features[0] != 32.0);
            CHECK(x.features[0] != 77.0);
            CHECK(x.features[0] != 55.0);
            neg_values.insert(x.features[0]);
        }
    }
    CHECK(pos == 3);
    CHECK(neg_values.size() == 20);
    CHECK(sample_training("img7", ch, fix, p)[5].features == s[5].features);

    p.n_pos = 4;
    try {
        sample_training("img7", ch, fix, p);
        FAIL("expected a data error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Data);
        CHECK(std::string(e.what()).find("img7") != std::string::npos);
    }
    p.n_pos = 4;
    p.fixation_radius = 1;
    CHECK(sample_training("img7", ch, fix, p).size() == 24);
}

TEST_CASE("combiner JSON round trip is exact") {
    testutil::TempDir dir("svm");
    LinearCombiner m = train_linear_svm(separable(8, 10), {});
    m.channel_names = {"model", "vp"};
    m.trained_on = {"a", "b"};
    save_combiner(m, dir.path / "m.json");
    CHECK(load_combiner(dir.path / "m.json") == m);
    CHECK(combiner_from_json(combiner_to_json(m)) == m);
    CHECK_THROWS_AS(combiner_from_json("{\"weights\": 3}"), Error);
}

TEST_CASE("identity combiner passes a channel through") {
    const LinearCombiner id = LinearCombiner::identity("vp");
    const std::vector<double> f{0.37};
    CHECK(id.decision(f) == 0.37);
    CHECK(id.channel_names == std::vector<std::string>{"vp"});
}

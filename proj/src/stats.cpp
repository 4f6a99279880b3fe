#include "vpsal/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <vector>

#include "vpsal/error.hpp"

namespace vpsal {

double mean(std::span<const double> v) {
    if (v.empty()) {
        throw Error(ErrorCode::InvalidArgument, "mean of an empty sample");
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

namespace {

double sample_variance(std::span<const double> v, double m) {
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(v.size() - 1);
}

double two_tailed_p(double t, double df) {
    if (std::isinf(t)) {
        return 0.0;
    }
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

// Zero spread: identical when the mean difference is zero too, otherwise infinitely significant.
TTest degenerate(TTest r, double diff) {
    if (diff == 0.0) {
        r.identical = true;
        r.t = 0.0;
        r.p = 1.0;
    } else {
        r.t = diff > 0.0 ? INFINITY : -INFINITY;
        r.p = 0.0;
    }
    return r;
}

}  // namespace

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::InvalidArgument, "paired t-test needs samples of equal length");
    }
    if (a.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "t-test needs at least two observations");
    }
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = a[i] - b[i];
    }
    TTest r;
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    r.df = static_cast<double>(d.size() - 1);
    const double md = mean(d);
    const double sd = std::sqrt(sample_variance(d, md));
    if (!(sd > 0.0)) {
        return degenerate(r, md);
    }
    r.t = md / (sd / std::sqrt(static_cast<double>(d.size())));
    r.p = two_tailed_p(r.t, r.df);
    return r;
}

TTest one_sample_t_test(std::span<const double> a, double mu) {
    if (a.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "t-test needs at least two observations");
    }
    TTest r;
    r.mean_a = mean(a);
    r.mean_b = mu;
    r.df = static_cast<double>(a.size() - 1);
    const double sd = std::sqrt(sample_variance(a, r.mean_a));
    if (!(sd > 0.0)) {
        return degenerate(r, r.mean_a - mu);
    }
    r.t = (r.mean_a - mu) / (sd / std::sqrt(static_cast<double>(a.size())));
    r.p = two_tailed_p(r.t, r.df);
    return r;
}

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "t-test needs at least two observations per sample");
    }
    TTest r;
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    const double va = sample_variance(a, r.mean_a) / static_cast<double>(a.size());
    const double vb = sample_variance(b, r.mean_b) / static_cast<double>(b.size());
    const double se2 = va + vb;
    if (!(se2 > 0.0)) {
        r.df = static_cast<double>(a.size() + b.size() - 2);
        return degenerate(r, r.mean_a - r.mean_b);
    }
    r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
    r.df = se2 * se2 /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    r.p = two_tailed_p(r.t, r.df);
    return r;
}

double improvement(double base_mean, double combined_mean) {
    if (base_mean == 0.0) {
        throw Error(ErrorCode::InvalidArgument, "improvement undefined for a zero base mean");
    }
    return 100.0 * (combined_mean - base_mean) / base_mean;
}

}  // namespace vpsal

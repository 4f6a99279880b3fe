#pragma once

#include <span>

namespace vpsal {

struct TTest {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double t = 0.0;
    double df = 0.0;
    /// Two-tailed.
    double p = 1.0;
    /// Both samples were identical element-wise; t is undefined and p is reported as 1.
    bool identical = false;
};

/// Paired two-tailed t-test on the per-element differences a[i] - b[i].
TTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// One-sample two-tailed t-test of mean(a) against `mu`.
TTest one_sample_t_test(std::span<const double> a, double mu);

/// Welch's unequal-variance two-tailed t-test.
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);

/// Percentage change 100 * (combined - base) / base. Throws on a zero base.
double improvement(double base_mean, double combined_mean);

}  // namespace vpsal

#pragma once

#include <span>
#include <string>
#include <vector>

namespace porogen::stats {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Effect size with the conventional interpretation bands.
struct EffectSize {
    double d = 0.0;
    std::string band;  // negligible / small / medium / large
};

/// p < 0.001 -> ***, < 0.01 -> **, < 0.05 -> *, else ns
std::string significance_marker(double p_value);

/// Two-sample Kolmogorov-Smirnov: sup |ECDF_a - ECDF_b|, asymptotic p.
TestResult ks_test(std::span<const double> a, std::span<const double> b);

/// Two-sample Student's t with pooled variance, two-sided p.
TestResult t_test(std::span<const double> a, std::span<const double> b);

/// |mean_a - mean_b| / pooled standard deviation.
EffectSize cohens_d(std::span<const double> a, std::span<const double> b);

/// 1 - sum(obs - target)^2 / sum(obs - mean(obs))^2.
double r_squared(std::span<const double> targets, std::span<const double> observed);

double mean_absolute_error(std::span<const double> targets, std::span<const double> observed);

}  // namespace porogen::stats

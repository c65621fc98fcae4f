#include "porogen/stats/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "porogen/core/errors.hpp"

namespace porogen::stats {

namespace {

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

double sample_variance(std::span<const double> v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

// Asymptotic two-sample Kolmogorov distribution tail.
double ks_p_value(double d, std::size_t n, std::size_t m) {
    double ne = static_cast<double>(n) * m / (n + m);
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        sign = -sign;
        if (std::abs(term) < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

std::string significance_marker(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "ns";
}

TestResult ks_test(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("ks_test: empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const std::size_t n = sa.size(), m = sb.size();
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < n && j < m) {
        double va = sa[i], vb = sb[j];
        if (va <= vb) while (i < n && sa[i] == va) ++i;
        if (vb <= va) while (j < m && sb[j] == vb) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    d = std::max(d, std::abs(1.0 - static_cast<double>(j) / m));
    d = std::max(d, std::abs(static_cast<double>(i) / n - 1.0));
    return {d, ks_p_value(d, n, m)};
}

TestResult t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw ValidationError("t_test: need at least 2 per sample");
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
    const std::size_t n = a.size(), m = b.size();
    const double df = static_cast<double>(n + m - 2);
    const double pooled = ((n - 1) * va + (m - 1) * vb) / df;
    if (pooled <= 0.0) throw ValidationError("t_test: degenerate zero pooled variance");
    const double t = (ma - mb) / std::sqrt(pooled * (1.0 / n + 1.0 / m));
    boost::math::students_t dist(df);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return {t, p};
}

EffectSize cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw ValidationError("cohens_d: need at least 2 per sample");
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
    const std::size_t n = a.size(), m = b.size();
    const double pooled = ((n - 1) * va + (m - 1) * vb) / (n + m - 2);
    if (pooled <= 0.0) throw ValidationError("cohens_d: zero pooled standard deviation");
    EffectSize e;
    e.d = std::abs(ma - mb) / std::sqrt(pooled);
    if (e.d < 0.2) e.band = "negligible";
    else if (e.d < 0.5) e.band = "small";
    else if (e.d < 0.8) e.band = "medium";
    else e.band = "large";
    return e;
}

double r_squared(std::span<const double> targets, std::span<const double> observed) {
    if (targets.size() != observed.size() || targets.size() < 2)
        throw ValidationError("r_squared: need equal-length samples of size >= 2");
    const double mo = mean(observed);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ss_res += (observed[i] - targets[i]) * (observed[i] - targets[i]);
        ss_tot += (observed[i] - mo) * (observed[i] - mo);
    }
    // Constant-observation detection is relative: bitwise-equal values can
    // still leave rounding residue around their mean.
    const double tot_tol = static_cast<double>(targets.size()) *
                           std::pow(64.0 * std::numeric_limits<double>::epsilon() *
                                        (std::abs(mo) + 1e-30),
                                    2);
    if (ss_tot <= tot_tol) {
        // Constant observations: the null model. Score 0 unless they also hit
        // the targets exactly, which carries no information at all.
        if (ss_res <= tot_tol)
            throw ValidationError("r_squared: degenerate zero total variance");
        return 0.0;
    }
    return 1.0 - ss_res / ss_tot;
}

double mean_absolute_error(std::span<const double> targets, std::span<const double> observed) {
    if (targets.size() != observed.size() || targets.empty())
        throw ValidationError("mean_absolute_error: need equal non-empty samples");
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) s += std::abs(observed[i] - targets[i]);
    return s / targets.size();
}

}  // namespace porogen::stats

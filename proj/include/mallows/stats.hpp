#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

// Small numeric helpers shared by the simulation layers: deterministic
// summation, summaries, two-sample Kolmogorov-Smirnov, least squares lines.

namespace mallows::stats {

// Pairwise (cascade) summation. The reduction tree depends only on the
// length, never on how the values were produced, so totals are bit
// reproducible for a fixed input vector.
inline double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_of: empty input");
    return pairwise_sum(xs) / static_cast<double>(xs.size());
}

// Unbiased sample variance; 0 for a single observation.
inline double sample_variance(std::span<const double> xs, double mean) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] - mean;
        sq[i] = d * d;
    }
    return pairwise_sum(sq) / static_cast<double>(n - 1);
}

inline constexpr std::array<double, 7> summary_levels{0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};

// Order statistic at level p with the left-continuous inverse convention:
// the ceil(n*p)-th smallest value. Input must be sorted.
inline double sorted_quantile(std::span<const double> sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 0) throw std::invalid_argument("sorted_quantile: empty input");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("sorted_quantile: p outside (0,1]");
    const double np = p * static_cast<double>(n);
    std::size_t k = static_cast<std::size_t>(std::ceil(np));
    if (k < 1) k = 1;
    if (k > n) k = n;
    // Repair rounding at the lattice points k/n.
    while (k > 1 && static_cast<double>(k - 1) >= np) --k;
    while (k < n && static_cast<double>(k) < np) ++k;
    return sorted[k - 1];
}

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::array<double, 7> quantiles{};  // at summary_levels
};

inline Summary summarize(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty input");
    Summary s;
    s.count = values.size();
    s.mean = mean_of(values);
    s.variance = sample_variance(values, s.mean);
    std::sort(values.begin(), values.end());
    for (std::size_t i = 0; i < summary_levels.size(); ++i)
        s.quantiles[i] = sorted_quantile(values, summary_levels[i]);
    return s;
}

// Two-sample KS statistic sup_x |F_a(x) - F_b(x)|, ties handled by advancing
// both samples past each distinct value before comparing.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double v;
        if (j >= b.size()) v = a[i];
        else if (i >= a.size()) v = b[j];
        else v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Ordinary least squares y ~ intercept + slope * x. The standard error is
// the usual residual-based one (0 when there are only two points).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("fit_line: need two or more paired points");
    const double xbar = mean_of(x);
    const double ybar = mean_of(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = ybar - f.slope * xbar;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = y[i] - f.intercept - f.slope * x[i];
            rss += e * e;
        }
        f.slope_stderr = std::sqrt(rss / (static_cast<double>(n - 2) * sxx));
    }
    return f;
}

}  // namespace mallows::stats

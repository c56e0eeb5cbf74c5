#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mallows/distance.hpp"
#include "mallows/distribution.hpp"
#include "mallows/empirical.hpp"
#include "mallows/errors.hpp"
#include "mallows/rng.hpp"
#include "mallows/stats.hpp"
#include "mallows/step_distribution.hpp"

// Bootstrap machinery for the root sqrt(n)(sample mean - mean). The law of
// the root under the true model and under the empirical law are both
// represented as sampled distributions; their order-2 coupling distance is
// the quantity the closed-form envelopes bracket:
//
//     |s - sigma|  <=  d_2(bootstrap root, true root)  <=  d_2(empirical, model),
//
// with s the 1/n-normalized sample standard deviation. Small samples (n <= 7)
// admit exact enumeration of all n^n resamples, which serves as an oracle for
// the Monte Carlo representation.

namespace mallows {

inline EmpiricalDistribution resample(const EmpiricalDistribution& sample, RandomStream& rng) {
    const auto xs = sample.values();
    std::vector<double> out(xs.size());
    for (double& v : out) v = xs[rng.below(xs.size())];
    return EmpiricalDistribution(std::move(out));
}

enum class RootSide { sampling, bootstrap };

inline const char* to_string(RootSide s) {
    return s == RootSide::sampling ? "sampling" : "bootstrap";
}

// Law of the normalized root, either Monte Carlo (empirical draws) or exact
// (enumerated atoms). count records draws or the n^n enumeration size.
struct RootDistribution {
    RootSide side = RootSide::sampling;
    std::size_t n = 0;
    bool exact = false;
    std::size_t count = 0;
    std::variant<EmpiricalDistribution, StepDistribution> law;
};

inline double root_distance(const RootDistribution& a, const RootDistribution& b) {
    return std::visit(
        [](const auto& x, const auto& y) -> double {
            using X = std::decay_t<decltype(x)>;
            using Y = std::decay_t<decltype(y)>;
            if constexpr (std::is_same_v<X, StepDistribution> &&
                          std::is_same_v<Y, EmpiricalDistribution>)
                return distance(y, x, 2.0).value;
            else
                return distance(x, y, 2.0).value;
        },
        a.law, b.law);
}

namespace boot_detail {

inline void require_positive(std::size_t v, const char* what) {
    if (v == 0) throw std::invalid_argument(std::string(what) + " must be positive");
}

// Mean of n fresh draws, via the same inverse-transform stream the models'
// sample() uses, without materializing the sample.
template <typename Law>
inline double sample_mean(const Law& f, std::size_t n, RandomStream& rng) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f.quantile(rng.uniform01());
    return s / static_cast<double>(n);
}

inline std::vector<double> root_draws_from_law(const auto& f, double center, std::size_t n,
                                               std::size_t reps, RandomStream& rng) {
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    std::vector<double> out(reps);
    for (double& v : out) v = sqrt_n * (sample_mean(f, n, rng) - center);
    return out;
}

}  // namespace boot_detail

inline RootDistribution true_root_distribution(const DistributionModel& f, std::size_t n,
                                               std::size_t reps, RandomStream& rng) {
    boot_detail::require_positive(n, "true_root_distribution: n");
    boot_detail::require_positive(reps, "true_root_distribution: reps");
    if (!(f.variance() < kInf))
        throw divergent_moment_error("true_root_distribution: model variance diverges");
    return {RootSide::sampling, n, false, reps,
            EmpiricalDistribution(boot_detail::root_draws_from_law(f, f.mean(), n, reps, rng))};
}

inline RootDistribution true_root_distribution(const StepDistribution& f, std::size_t n,
                                               std::size_t reps, RandomStream& rng) {
    boot_detail::require_positive(n, "true_root_distribution: n");
    boot_detail::require_positive(reps, "true_root_distribution: reps");
    return {RootSide::sampling, n, false, reps,
            EmpiricalDistribution(boot_detail::root_draws_from_law(f, f.mean(), n, reps, rng))};
}

namespace boot_detail {

inline std::vector<double> bootstrap_root_draws(const EmpiricalDistribution& sample,
                                                std::size_t reps, RandomStream& rng) {
    const auto xs = sample.values();
    const std::size_t n = xs.size();
    const double xbar = sample.mean();
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    std::vector<double> draws(reps);
    for (double& v : draws) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += xs[rng.below(n)];
        v = sqrt_n * (s / static_cast<double>(n) - xbar);
    }
    return draws;
}

}  // namespace boot_detail

inline RootDistribution bootstrap_root_distribution(const EmpiricalDistribution& sample,
                                                    std::size_t reps, RandomStream& rng) {
    boot_detail::require_positive(reps, "bootstrap_root_distribution: reps");
    std::vector<double> draws = boot_detail::bootstrap_root_draws(sample, reps, rng);
    return {RootSide::bootstrap, sample.size(), false, reps,
            EmpiricalDistribution(std::move(draws))};
}

// Exact bootstrap root law: every one of the n^n equally likely resamples,
// visited as nondecreasing index tuples weighted by their multinomial
// multiplicity. Capped at n = 7 (7^7 ~ 8.2e5 resamples, 1716 tuples).
inline RootDistribution exact_bootstrap_root_distribution(const EmpiricalDistribution& sample) {
    const auto xs = sample.values();
    const std::size_t n = xs.size();
    if (n > 7)
        throw refusal_error("exact bootstrap enumeration is capped at n = 7 (n^n resamples); "
                            "got n = " + std::to_string(n));
    const double xbar = sample.mean();
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    double factorial[8];
    factorial[0] = 1.0;
    for (int i = 1; i < 8; ++i) factorial[i] = factorial[i - 1] * i;
    const double total = std::pow(static_cast<double>(n), static_cast<double>(n));

    std::vector<std::pair<double, double>> roots;  // (root value, probability)
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += xs[idx[k]];
        double perms = factorial[n];
        for (std::size_t k = 0; k < n;) {
            std::size_t j = k;
            while (j < n && idx[j] == idx[k]) ++j;
            perms /= factorial[j - k];
            k = j;
        }
        roots.emplace_back(sqrt_n * (sum / static_cast<double>(n) - xbar), perms / total);

        // advance to the next nondecreasing tuple
        std::size_t k = n;
        while (k > 0 && idx[k - 1] == n - 1) --k;
        if (k == 0) break;
        const std::size_t v = idx[k - 1] + 1;
        for (std::size_t j = k - 1; j < n; ++j) idx[j] = v;
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> atoms, masses;
    for (const auto& [x, w] : roots) {
        if (!atoms.empty() && atoms.back() == x)
            masses.back() += w;
        else {
            atoms.push_back(x);
            masses.push_back(w);
        }
    }
    return {RootSide::bootstrap, n, true, static_cast<std::size_t>(total),
            StepDistribution(std::move(atoms), std::move(masses))};
}

struct GapEstimate {
    double gap = 0.0;       // d_2 between the bootstrap and true root laws
    double mc_error = 0.0;  // split-half error estimate, summed over MC sides
    std::size_t draws = 0;  // per Monte Carlo side
    bool exact_bootstrap = false;
};

namespace boot_detail {

// Half-vs-half coupling distance of one MC representation, halved: an
// internal consistency estimate of how far the full representation sits
// from its own limit. The split must be in generation order (the halves of
// a sorted vector are order statistics, not independent replicates).
inline double split_half_error(const std::vector<double>& draws) {
    const std::size_t h = draws.size() / 2;
    if (h == 0 || draws.size() - h == 0) return 0.0;
    EmpiricalDistribution a(std::vector<double>(draws.begin(), draws.begin() + h));
    EmpiricalDistribution b(std::vector<double>(draws.begin() + h, draws.end()));
    return 0.5 * distance(a, b, 2.0).value;
}

}  // namespace boot_detail

// d_2 between the bootstrap root law of the given sample and the true root
// law under f, both at the sample's n, estimated with `draws` realizations
// per Monte Carlo side. With exact_bootstrap the left side is enumerated
// instead (n <= 7) and only the true side contributes MC error.
inline GapEstimate bootstrap_gap(const EmpiricalDistribution& sample, const DistributionModel& f,
                                 std::size_t draws, RandomStream& rng,
                                 bool exact_bootstrap = false) {
    boot_detail::require_positive(draws, "bootstrap_gap: draws");
    const std::size_t n = sample.size();
    GapEstimate est;
    est.draws = draws;
    est.exact_bootstrap = exact_bootstrap;

    std::vector<double> boot_draws;
    std::optional<StepDistribution> exact_law;
    if (exact_bootstrap)
        exact_law = std::get<StepDistribution>(exact_bootstrap_root_distribution(sample).law);
    else
        boot_draws = boot_detail::bootstrap_root_draws(sample, draws, rng);
    const std::vector<double> truth_draws =
        boot_detail::root_draws_from_law(f, f.mean(), n, draws, rng);

    double err = boot_detail::split_half_error(truth_draws);
    if (!exact_bootstrap) err += boot_detail::split_half_error(boot_draws);
    est.mc_error = err;

    const EmpiricalDistribution truth_emp(truth_draws);
    est.gap = exact_bootstrap ? distance(truth_emp, *exact_law, 2.0).value
                              : distance(EmpiricalDistribution(std::move(boot_draws)), truth_emp,
                                         2.0).value;
    return est;
}

// d_2(empirical, model): the distribution-level distance that stochastically
// dominates the root-law gap.
inline double upper_bound(const EmpiricalDistribution& sample, const DistributionModel& f) {
    return distance(sample, f, 2.0).value;
}

// |s - sigma| with the 1/n-normalized sample standard deviation: the
// deterministic floor under the root-law gap.
inline double lower_bound(const EmpiricalDistribution& sample, const DistributionModel& f) {
    const auto xs = sample.values();
    const double xbar = sample.mean();
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - xbar) * (xs[i] - xbar);
    const double s = std::sqrt(stats::pairwise_sum(sq) / static_cast<double>(xs.size()));
    return std::fabs(s - std::sqrt(f.variance()));
}

struct ShiftIdentityReport {
    double lhs_squared = 0.0;  // d_2(recentered empirical, recentered model)^2
    double rhs_squared = 0.0;  // d_2(empirical, model)^2 - (mean gap)^2
    bool satisfied = false;
};

// Centering both laws at their means removes exactly the squared mean gap
// from the squared distance; quadrature on both sides should agree to 1e-8.
inline ShiftIdentityReport shift_identity_check(const EmpiricalDistribution& sample,
                                                const DistributionModel& f) {
    const double delta = sample.mean() - f.mean();
    ShiftIdentityReport rep;
    rep.lhs_squared = distance(sample, f.shifted(delta), 2.0).rth_power;
    rep.rhs_squared = distance(sample, f, 2.0).rth_power - delta * delta;
    rep.satisfied = std::fabs(rep.lhs_squared - rep.rhs_squared) <= 1e-8;
    return rep;
}

struct SigmaCltReport {
    std::size_t n = 0;
    std::size_t reps = 0;
    double mean = 0.0;                 // MC mean of sqrt(n)(s - sigma)
    double variance = 0.0;             // MC variance of the same draws
    double asymptotic_variance = 0.0;  // (E(X-mu)^4 - sigma^4) / (4 sigma^2)
};

inline SigmaCltReport sigma_clt_statistics(const DistributionModel& f, std::size_t n,
                                           std::size_t reps, RandomStream& rng) {
    boot_detail::require_positive(n, "sigma_clt_statistics: n");
    boot_detail::require_positive(reps, "sigma_clt_statistics: reps");
    if (f.max_finite_moment_order() <= 4.0)
        throw refusal_error("sigma_clt_statistics: the fourth moment of " + f.describe() +
                            " diverges, so sqrt(n)(s - sigma) has no Gaussian limit; "
                            "use heavy_tail_trace to study the non-vanishing regime instead");
    const double var = f.variance();
    if (!(var > 0.0))
        throw std::domain_error("sigma_clt_statistics: model variance must be positive");
    const double sigma = std::sqrt(var);
    const double mu = f.mean();
    const double mu4 = abs_moment(f.shifted(-mu), 4.0);

    SigmaCltReport rep;
    rep.n = n;
    rep.reps = reps;
    rep.asymptotic_variance = (mu4 - var * var) / (4.0 * var);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    std::vector<double> draws(reps), buf(n);
    for (double& v : draws) {
        for (double& x : buf) x = f.quantile(rng.uniform01());
        const double xbar = stats::mean_of(buf);
        double ss = 0.0;
        for (double x : buf) ss += (x - xbar) * (x - xbar);
        const double s = std::sqrt(ss / static_cast<double>(n));
        v = sqrt_n * (s - sigma);
    }
    rep.mean = stats::mean_of(draws);
    rep.variance = stats::sample_variance(draws, rep.mean);
    return rep;
}

struct HeavyTailTraceRow {
    std::size_t n = 0;
    double lower = 0.0;   // |s - sigma| along the path prefix
    double scaled = 0.0;  // n^{delta/(2+delta)} * lower
};

struct HeavyTailTrace {
    std::string model;
    double delta = 0.0;
    double sigma = 0.0;
    std::string note;
    std::vector<HeavyTailTraceRow> rows;
};

// Diagnostic, not a verdict: tracks n^{delta/(2+delta)} |s - sigma| along one
// growing sample path. When E|X - mu|^{2+delta} diverges this sequence need
// not vanish; the trace is reported without a pass/fail interpretation.
inline HeavyTailTrace heavy_tail_trace(const DistributionModel& f,
                                       std::span<const std::size_t> n_grid, double delta,
                                       RandomStream& rng) {
    if (n_grid.empty()) throw std::invalid_argument("heavy_tail_trace: empty n grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("heavy_tail_trace: n grid must be strictly increasing");
    if (n_grid.front() < 2) throw std::invalid_argument("heavy_tail_trace: n must be at least 2");
    if (!(delta > 0.0)) throw std::invalid_argument("heavy_tail_trace: delta must be positive");
    if (!(f.variance() < kInf))
        throw divergent_moment_error("heavy_tail_trace: model variance diverges");

    HeavyTailTrace trace;
    trace.model = f.describe();
    trace.delta = delta;
    trace.sigma = std::sqrt(f.variance());
    trace.note = 2.0 + delta >= f.max_finite_moment_order()
                     ? "E|X - mu|^(2+delta) diverges: the scaled trace need not vanish"
                     : "E|X - mu|^(2+delta) is finite: the scaled trace should drift toward 0";

    std::vector<double> path(n_grid.back());
    for (double& x : path) x = f.quantile(rng.uniform01());
    const double expo = delta / (2.0 + delta);
    for (std::size_t n : n_grid) {
        std::span<const double> prefix(path.data(), n);
        const double xbar = stats::mean_of(prefix);
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) sq[i] = (prefix[i] - xbar) * (prefix[i] - xbar);
        const double s = std::sqrt(stats::pairwise_sum(sq) / static_cast<double>(n));
        HeavyTailTraceRow row;
        row.n = n;
        row.lower = std::fabs(s - trace.sigma);
        row.scaled = std::pow(static_cast<double>(n), expo) * row.lower;
        trace.rows.push_back(row);
    }
    return trace;
}

}  // namespace mallows

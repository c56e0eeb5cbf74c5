#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mallows/distance.hpp"
#include "mallows/distribution.hpp"
#include "mallows/empirical.hpp"
#include "mallows/errors.hpp"
#include "mallows/hazard.hpp"
#include "mallows/rng.hpp"
#include "mallows/stats.hpp"
#include "mallows/step_distribution.hpp"

// Brownian bridge sampling and the limiting laws of normalized coupling
// distances: for a continuous law with well-behaved tails,
//
//     n^{1/2} d_r  ->  ( integral of |B(p)|^r / f(Q(p))^r dp )^{1/r},
//
// and for a finitely supported law,
//
//     n^{1/(2r)} d_r  ->  ( sum_j |B(q_j)| (x_{j+1} - x_j)^r )^{1/r}.
//
// The bridge is sampled exactly on its grid (Wiener increments minus the
// pinned drift), so the discrete limit needs no covariance factorization.

namespace mallows {

struct BridgePath {
    std::vector<double> grid;
    std::vector<double> values;
};

namespace bridge_detail {

inline void validate_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw std::domain_error("bridge grid: need at least two points");
    if (grid.front() != 0.0 || grid.back() != 1.0)
        throw std::domain_error("bridge grid: endpoints must be exactly 0 and 1");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]))
            throw std::domain_error("bridge grid: points must be strictly increasing");
}

// Exact finite-dimensional bridge law: W on the grid by independent Gaussian
// increments, then B(p) = W(p) - p W(1). Endpoint values are exactly 0.
inline void fill_bridge(std::span<const double> grid, RandomStream& rng,
                        std::vector<double>& out) {
    out.resize(grid.size());
    out[0] = 0.0;
    double w = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        w += std::sqrt(grid[k] - grid[k - 1]) * rng.normal();
        out[k] = w;
    }
    const double w1 = out.back();
    for (std::size_t k = 1; k < grid.size(); ++k) out[k] -= grid[k] * w1;
}

}  // namespace bridge_detail

inline BridgePath sample_bridge(std::span<const double> grid, RandomStream& rng) {
    bridge_detail::validate_grid(grid);
    BridgePath path;
    path.grid.assign(grid.begin(), grid.end());
    bridge_detail::fill_bridge(grid, rng, path.values);
    return path;
}

enum class LimitKind { continuous, discrete };

inline const char* to_string(LimitKind k) {
    return k == LimitKind::continuous ? "continuous" : "discrete";
}

struct LimitSample {
    LimitKind kind = LimitKind::continuous;
    double order = 2.0;
    std::string source;           // description of the model behind the limit
    std::size_t grid_points = 0;  // continuous limits only
    std::string note;
    std::vector<double> draws;
};

// Limit law for a finitely supported model: per draw, one exact bridge
// vector at the interior cumulative levels, summed against the r-th powers
// of the atom gaps. A single atom gives the degenerate law at 0.
inline LimitSample limit_discrete(const StepDistribution& f, double r, std::size_t reps,
                                  RandomStream& rng) {
    distance_detail::require_order(r);
    if (reps == 0) throw std::invalid_argument("limit_discrete: reps must be positive");
    LimitSample out;
    out.kind = LimitKind::discrete;
    out.order = r;
    out.source = f.describe();
    out.draws.assign(reps, 0.0);
    const std::size_t m = f.size();
    if (m == 1) {
        out.note = "single atom: limit degenerates to 0";
        return out;
    }
    std::vector<double> grid;
    grid.reserve(m + 1);
    grid.push_back(0.0);
    for (std::size_t j = 0; j + 1 < m; ++j) grid.push_back(f.cumulative()[j]);
    grid.push_back(1.0);
    std::vector<double> gap_pow(m - 1);
    for (std::size_t j = 0; j + 1 < m; ++j)
        gap_pow[j] = std::pow(f.atoms()[j + 1] - f.atoms()[j], r);
    std::vector<double> b;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        bridge_detail::fill_bridge(grid, rng, b);
        double sum = 0.0;
        for (std::size_t j = 0; j + 1 < m; ++j) sum += std::fabs(b[j + 1]) * gap_pow[j];
        out.draws[rep] = r == 2.0 ? std::sqrt(sum) : std::pow(sum, 1.0 / r);
    }
    return out;
}

struct ContinuousLimitOptions {
    std::size_t grid_points = 4097;
    // The unbounded-support limit additionally assumes the density is
    // monotone near each end of the support. That is not certified
    // numerically; the caller asserts it here.
    bool assume_monotone_tail_density = false;
};

// Limit law for a continuous model: per draw, one bridge path on a uniform
// M-point grid and the composite trapezoid value of |B(p)|^r / f(Q(p))^r.
// Bounded supports with positive density contribute exact zeros at the
// pinned endpoints; unbounded supports require a finite inverse-hazard
// integral (refused otherwise) and have their endpoint cells excised.
inline LimitSample limit_continuous(const DistributionModel& f, double r, std::size_t reps,
                                    RandomStream& rng, const ContinuousLimitOptions& opt = {}) {
    distance_detail::require_order(r);
    if (reps == 0) throw std::invalid_argument("limit_continuous: reps must be positive");
    if (opt.grid_points < 3)
        throw std::invalid_argument("limit_continuous: grid needs at least 3 points");

    LimitSample out;
    out.kind = LimitKind::continuous;
    out.order = r;
    out.source = f.describe();
    out.grid_points = opt.grid_points;

    bool excise = false;
    if (!f.bounded_support()) {
        const TailVerdict v = inverse_hazard_integral_verdict(f);
        if (v.verdict != Verdict::finite)
            throw refusal_error("limit_continuous: unbounded support needs a finite "
                                "inverse-hazard integral; verdict for " +
                                f.describe() + " is " + to_string(v.verdict) + " (" + v.note +
                                ")");
        if (!opt.assume_monotone_tail_density)
            throw refusal_error("limit_continuous: unbounded support also requires "
                                "assume_monotone_tail_density, which only the caller can assert");
        excise = true;
        out.note = "endpoint cells excised: first and last grid cells dropped from the integral";
    }

    const std::size_t M = opt.grid_points;
    std::vector<double> grid(M);
    const double h = 1.0 / static_cast<double>(M - 1);
    for (std::size_t k = 0; k < M; ++k) grid[k] = static_cast<double>(k) * h;
    grid.back() = 1.0;

    // 1/f(Q(p))^r at the interior nodes; the endpoint nodes never enter (the
    // bridge vanishes there, and excision drops their cells entirely).
    std::vector<double> weight(M, 0.0);
    for (std::size_t k = 1; k + 1 < M; ++k) {
        const double dens = f.pdf(f.quantile(grid[k]));
        if (!(dens > 0.0))
            throw std::domain_error("limit_continuous: density vanishes at the quantile of p = " +
                                    std::to_string(grid[k]));
        weight[k] = std::pow(1.0 / dens, r);
    }

    const std::size_t cell_first = excise ? 1 : 0;
    const std::size_t cell_last = excise ? M - 3 : M - 2;  // inclusive cell index
    out.draws.assign(reps, 0.0);
    const bool square = r == 2.0;
    std::vector<double> b, g(M, 0.0);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        bridge_detail::fill_bridge(grid, rng, b);
        for (std::size_t k = 1; k + 1 < M; ++k)
            g[k] = (square ? b[k] * b[k] : std::pow(std::fabs(b[k]), r)) * weight[k];
        double sum = 0.0;
        for (std::size_t k = cell_first; k <= cell_last; ++k) sum += g[k] + g[k + 1];
        const double v = 0.5 * h * sum;
        out.draws[rep] = square ? std::sqrt(v) : std::pow(v, 1.0 / r);
    }
    return out;
}

struct LimitComparison {
    double ks = 0.0;  // two-sample Kolmogorov-Smirnov statistic
    double d2 = 0.0;  // order-2 coupling distance between the two samples
};

inline LimitComparison compare_to_limit(const std::vector<double>& normalized,
                                        const LimitSample& limit) {
    if (normalized.empty() || limit.draws.empty())
        throw std::invalid_argument("compare_to_limit: both samples must be nonempty");
    LimitComparison c;
    c.ks = stats::ks_two_sample(normalized, limit.draws);
    c.d2 = distance(EmpiricalDistribution(normalized), EmpiricalDistribution(limit.draws), 2.0)
               .value;
    return c;
}

}  // namespace mallows

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mallows/distance.hpp"
#include "mallows/distribution.hpp"
#include "mallows/empirical.hpp"
#include "mallows/errors.hpp"
#include "mallows/quadrature.hpp"

// Tail diagnostics built on the two-sided hazard function
//
//     h(x) = f(x)/survival(x)  for x at or above the median,
//     h(x) = f(x)/cdf(x)       below the median.
//
// Divergence questions (does the inverse-hazard integral converge? does h
// blow up in the tails?) cannot be settled by any finite computation, so
// the verdict operations return three-valued answers together with the grid
// or expansion evidence they examined.

namespace mallows {

enum class Tail { left, right };
enum class Verdict { finite, divergent, inconclusive };

inline const char* to_string(Tail t) { return t == Tail::left ? "left" : "right"; }
inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::finite: return "finite";
        case Verdict::divergent: return "divergent";
        default: return "inconclusive";
    }
}

struct HazardPoint {
    double p = 0.0;  // quantile level of x
    double x = 0.0;
    double h = 0.0;
};

struct RangeExpansion {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double partial = 0.0;    // integral over [x_lo, x_hi]
    double increment = 0.0;  // contribution added by this expansion
};

struct TailVerdict {
    std::string quantity;  // "inverse-hazard-integral" or "hazard-divergence"
    Verdict verdict = Verdict::inconclusive;
    double value = std::numeric_limits<double>::quiet_NaN();  // set for finite verdicts
    double error = 0.0;
    std::vector<RangeExpansion> expansions;
    std::vector<HazardPoint> left_points, right_points;
    std::string note;
};

// Two-sided hazard. Requires x strictly inside the open support with
// numerically resolvable mass on the dividing side.
inline double hazard_fn(const DistributionModel& m, double x) {
    if (!(x > m.support_lower() && x < m.support_upper()))
        throw std::domain_error("hazard_fn: x outside the open support");
    const double median = m.quantile(0.5);
    const double num = m.pdf(x);
    const double den = x >= median ? m.survival(x) : m.cdf(x);
    if (den <= 0.0)
        throw std::domain_error("hazard_fn: tail mass underflows at the requested x");
    return num / den;
}

// Classical right hazard f/survival, defined wherever survival(x) > 0.
// This is the rate in the survival reconstruction identity; it is not the
// two-sided variant.
inline double right_hazard(const DistributionModel& m, double x) {
    const double s = m.survival(x);
    if (!(s > 0.0)) throw std::domain_error("right_hazard: survival mass is zero at x");
    return m.pdf(x) / s;
}

namespace hazard_detail {

inline void require_second_moment(const DistributionModel& m) {
    if (2.0 >= m.max_finite_moment_order())
        throw divergent_moment_error("tail moments of order 2 diverge for " + m.describe());
}

// Conditional tail mean and variance over a mass interval of size `mass`,
// parametrized by the decaying coordinate (upper-tail mass q for the right
// tail, lower-tail mass p for the left). Two passes keep the variance free
// of cancellation against the squared mean.
template <class QuantileAt>
double conditional_variance(QuantileAt&& xat, double mass, double rel_tol) {
    const auto m1 = quad::integrate_decaying([&](double t) { return xat(t); }, mass, rel_tol);
    if (!m1.converged)
        throw divergent_moment_error("tail mean integration failed to converge");
    const double mean_t = m1.value / mass;
    const auto v = quad::integrate_decaying(
        [&](double t) {
            const double d = xat(t) - mean_t;
            return d * d;
        },
        mass, rel_tol);
    if (!v.converged)
        throw divergent_moment_error("tail variance integration failed to converge");
    return v.value / mass;
}

// Hazard values on a geometric mass grid marching from the point t into the
// requested tail; half-decade steps, six decades deep. The median point is
// included when the region covers it.
inline std::vector<HazardPoint> tail_grid(const DistributionModel& m, double t, Tail tail,
                                          int half_decades = 12) {
    std::vector<HazardPoint> pts;
    const double mass0 = tail == Tail::right ? m.survival(t) : m.cdf(t);
    if (!(mass0 > 0.0)) return pts;
    const double capped = std::min(mass0, 1.0 - 1e-12);
    for (int j = 0; j <= half_decades; ++j) {
        const double mass = capped * std::pow(10.0, -0.5 * j);
        const double x = tail == Tail::right ? m.quantile_upper(mass) : m.quantile(mass);
        if (!(x > m.support_lower() && x < m.support_upper())) continue;
        const double p = tail == Tail::right ? 1.0 - mass : mass;
        pts.push_back({p, x, hazard_fn(m, x)});
    }
    if (capped > 0.5) {
        const double x = m.quantile(0.5);
        if (x > m.support_lower() && x < m.support_upper())
            pts.push_back({0.5, x, hazard_fn(m, x)});
    }
    // Order from the anchor toward the deep end of the tail so the trend
    // heuristics can read the last entries as the deepest evidence.
    std::sort(pts.begin(), pts.end(), [&](const HazardPoint& a, const HazardPoint& b) {
        return tail == Tail::right ? a.x < b.x : a.x > b.x;
    });
    return pts;
}

// True when the last three entries keep moving in one direction by more
// than 1%, i.e. the grid shows no sign of leveling off.
inline bool trend_increasing(const std::vector<HazardPoint>& pts) {
    const std::size_t n = pts.size();
    if (n < 3) return false;
    return pts[n - 1].h > 1.01 * pts[n - 2].h && pts[n - 2].h > 1.01 * pts[n - 3].h;
}
inline bool trend_decreasing(const std::vector<HazardPoint>& pts) {
    const std::size_t n = pts.size();
    if (n < 3) return false;
    return pts[n - 1].h < 0.99 * pts[n - 2].h && pts[n - 2].h < 0.99 * pts[n - 3].h;
}

}  // namespace hazard_detail

// Var(X | X > t) for the right tail, Var(X | X < t) for the left; 0 when the
// conditioning event has no mass.
inline double tail_variance(const DistributionModel& m, double t, Tail tail = Tail::right) {
    hazard_detail::require_second_moment(m);
    const double rel_tol = 1e-9;
    if (tail == Tail::right) {
        const double mass = m.survival(t);
        if (!(mass > 0.0)) return 0.0;
        return hazard_detail::conditional_variance(
            [&](double q) { return m.quantile_upper(q); }, mass, rel_tol);
    }
    const double mass = m.cdf(t);
    if (!(mass > 0.0)) return 0.0;
    return hazard_detail::conditional_variance([&](double p) { return m.quantile(p); }, mass,
                                               rel_tol);
}

// E((X - t)^2 | X > t); 0 when no mass lies beyond t.
inline double tail_second_moment_ratio(const DistributionModel& m, double t) {
    hazard_detail::require_second_moment(m);
    const double mass = m.survival(t);
    if (!(mass > 0.0)) return 0.0;
    const auto r = quad::integrate_decaying(
        [&](double q) {
            const double d = m.quantile_upper(q) - t;
            return d * d;
        },
        mass, 1e-9);
    if (!r.converged)
        throw divergent_moment_error("tail second moment integration failed to converge");
    return r.value / mass;
}

struct SandwichReport {
    Tail tail = Tail::right;
    double t = 0.0;
    double inf_h = 0.0;
    double sup_h = 0.0;
    bool sup_unbounded = false;  // grid still rising at its deep end
    bool inf_vanishing = false;  // grid still falling at its deep end
    double lower = 0.0;          // 1/(12 sup^2), or 0 when sup looks unbounded
    double value = 0.0;          // tail variance
    double upper = 0.0;          // 4/inf^2, or +inf when inf looks vanishing
    bool satisfied = false;
    std::vector<HazardPoint> grid;
};

// Checks 1/(12 sup h^2) <= Var(X_t) <= 4/inf h^2 with inf/sup taken over the
// tail beyond t and estimated on a geometric quantile grid. A rising trend at
// the deep end downgrades the lower bound to 0 (sup may be infinite); a
// falling trend upgrades the upper bound to +inf and flags it.
inline SandwichReport check_variance_sandwich(const DistributionModel& m, double t,
                                              Tail tail = Tail::right) {
    const double median = m.quantile(0.5);
    if (tail == Tail::right && !(t >= median))
        throw std::invalid_argument("check_variance_sandwich: right tail needs t >= median");
    if (tail == Tail::left && !(t <= median))
        throw std::invalid_argument("check_variance_sandwich: left tail needs t <= median");

    SandwichReport rep;
    rep.tail = tail;
    rep.t = t;
    rep.grid = hazard_detail::tail_grid(m, t, tail);
    if (rep.grid.empty()) {  // no mass beyond t: variance 0, bounds vacuous
        rep.value = 0.0;
        rep.satisfied = true;
        rep.upper = kInf;
        return rep;
    }
    rep.inf_h = rep.grid.front().h;
    rep.sup_h = rep.grid.front().h;
    for (const auto& pt : rep.grid) {
        rep.inf_h = std::min(rep.inf_h, pt.h);
        rep.sup_h = std::max(rep.sup_h, pt.h);
    }
    rep.sup_unbounded = hazard_detail::trend_increasing(rep.grid);
    rep.inf_vanishing = hazard_detail::trend_decreasing(rep.grid);
    rep.lower = rep.sup_unbounded ? 0.0 : 1.0 / (12.0 * rep.sup_h * rep.sup_h);
    rep.upper = rep.inf_vanishing ? kInf : 4.0 / (rep.inf_h * rep.inf_h);
    rep.value = tail_variance(m, t, tail);
    const double slack = 1e-9;
    rep.satisfied = rep.value >= rep.lower * (1.0 - slack) - 1e-300 &&
                    (rep.upper == kInf || rep.value <= rep.upper * (1.0 + slack));
    return rep;
}

struct HardyReport {
    double lhs = 0.0;  // integral of f G^2 over (t, inf)
    double rhs = 0.0;  // 4 x integral of f (g/h)^2 over (t, inf)
    bool satisfied = false;
};

// Hardy-type inequality for a test function G with G(t) = 0 and derivative
// g: integral f G^2 <= 4 integral f (g/h)^2 over the right tail. Both sides
// are computed in the upper-tail mass coordinate, where f(x) dx = dq and
// 1/h(x) = q/f(x).
template <class GFun, class DerivFun>
HardyReport verify_hardy(const DistributionModel& m, double t, GFun&& G, DerivFun&& g) {
    const double mass = m.survival(t);
    HardyReport rep;
    if (!(mass > 0.0)) {
        rep.satisfied = true;
        return rep;
    }
    const auto lhs = quad::integrate_decaying(
        [&](double q) {
            const double v = G(m.quantile_upper(q));
            return v * v;
        },
        mass, 1e-9);
    const auto rhs = quad::integrate_decaying(
        [&](double q) {
            const double x = m.quantile_upper(q);
            const double w = g(x) * q / m.pdf(x);
            return w * w;
        },
        mass, 1e-9);
    if (!lhs.converged || !rhs.converged)
        throw divergent_moment_error("verify_hardy: an integral failed to converge for " +
                                     m.describe());
    rep.lhs = lhs.value;
    rep.rhs = 4.0 * rhs.value;
    rep.satisfied = rep.lhs <= rep.rhs * (1.0 + 1e-9) + 1e-12;
    return rep;
}

inline HardyReport verify_hardy_linear(const DistributionModel& m, double t) {
    return verify_hardy(m, t, [t](double x) { return x - t; }, [](double) { return 1.0; });
}
inline HardyReport verify_hardy_quadratic(const DistributionModel& m, double t) {
    return verify_hardy(m, t, [t](double x) { return (x - t) * (x - t); },
                        [t](double x) { return 2.0 * (x - t); });
}

// Convergence verdict for the inverse-hazard integral
//
//     integral of cdf(x) * survival(x) / pdf(x) dx over the support,
//
// evaluated on expanding symmetric quantile ranges [xi_{1/M}, xi_{1-1/M}],
// M = 1e2..1e8. Increments decaying at ratio < 1/2 over the last three
// expansions certify "finite" (with a geometric tail extrapolation);
// increments that fail to halve certify nothing, so persistent ratios >= 1/2
// are reported as "divergent" and mixed behavior as "inconclusive".
inline TailVerdict inverse_hazard_integral_verdict(const DistributionModel& m) {
    TailVerdict tv;
    tv.quantity = "inverse-hazard-integral";
    auto w = [&](double x) {
        const double f = m.pdf(x);
        return m.cdf(x) * m.survival(x) / f;
    };
    double partial = 0.0, err = 0.0;
    double prev_lo = 0.0, prev_hi = 0.0;
    std::vector<double> increments;
    for (int k = 2; k <= 8; ++k) {
        const double mass = std::pow(10.0, -k);
        const double lo = m.quantile(mass);
        const double hi = m.quantile_upper(mass);
        double inc = 0.0;
        if (k == 2) {
            const auto base = quad::integrate(w, lo, hi, 1e-9);
            inc = base.value;
            err += base.error;
        } else {
            const auto left = quad::integrate(w, lo, prev_lo, 1e-9);
            const auto right = quad::integrate(w, prev_hi, hi, 1e-9);
            inc = left.value + right.value;
            err += left.error + right.error;
        }
        partial += inc;
        increments.push_back(inc);
        tv.expansions.push_back({lo, hi, partial, inc});
        prev_lo = lo;
        prev_hi = hi;
    }
    // Ratios of the last three consecutive expansions.
    int below = 0, at_or_above = 0;
    double rho = 0.0;
    for (std::size_t j = increments.size() - 3; j < increments.size(); ++j) {
        const double prev = increments[j - 1];
        const double ratio = prev == 0.0 ? 0.0 : increments[j] / prev;
        rho = std::max(rho, ratio);
        (ratio < 0.5 ? below : at_or_above)++;
    }
    if (below == 3) {
        tv.verdict = Verdict::finite;
        const double safe_rho = std::min(rho, 0.49);
        const double extrapolated = increments.back() * safe_rho / (1.0 - safe_rho);
        tv.value = partial + extrapolated;
        tv.error = err + extrapolated;
        tv.note = "increments decay geometrically; tail extrapolated";
    } else if (at_or_above == 3) {
        tv.verdict = Verdict::divergent;
        tv.note = "expansion increments fail to halve; partial integrals keep growing";
    } else {
        tv.verdict = Verdict::inconclusive;
        tv.note = "mixed increment behavior on the examined ranges";
    }
    return tv;
}

// Does h(x) diverge as |x| -> inf (or toward a bounded endpoint)? Evaluated
// at quantile levels 1 - 10^{-k} (right) and 10^{-k} (left), k = 2..8. Each
// tail is classified as divergent (monotone increasing and at least doubling
// across the grid), finite (stabilized within 5%, value = deepest h; or
// monotone decreasing, value = 0), else inconclusive. The combined verdict
// is divergent only when both tails diverge.
inline TailVerdict hazard_divergence_verdict(const DistributionModel& m) {
    TailVerdict tv;
    tv.quantity = "hazard-divergence";
    for (int k = 2; k <= 8; ++k) {
        const double mass = std::pow(10.0, -k);
        const double xr = m.quantile_upper(mass);
        const double xl = m.quantile(mass);
        tv.right_points.push_back({1.0 - mass, xr, hazard_fn(m, xr)});
        tv.left_points.push_back({mass, xl, hazard_fn(m, xl)});
    }
    struct Classified {
        Verdict v;
        double value;
    };
    auto classify = [](const std::vector<HazardPoint>& pts) -> Classified {
        bool increasing = true;
        for (std::size_t i = 1; i < pts.size(); ++i)
            increasing = increasing && pts[i].h > pts[i - 1].h;
        if (increasing && pts.back().h >= 2.0 * pts.front().h)
            return {Verdict::divergent, std::numeric_limits<double>::quiet_NaN()};
        const std::size_t n = pts.size();
        double lo = pts[n - 3].h, hi = pts[n - 3].h;
        for (std::size_t i = n - 2; i < n; ++i) {
            lo = std::min(lo, pts[i].h);
            hi = std::max(hi, pts[i].h);
        }
        if (hi <= 1.05 * lo) return {Verdict::finite, pts.back().h};
        if (hazard_detail::trend_decreasing(pts)) return {Verdict::finite, 0.0};
        return {Verdict::inconclusive, std::numeric_limits<double>::quiet_NaN()};
    };
    const Classified left = classify(tv.left_points);
    const Classified right = classify(tv.right_points);
    if (left.v == Verdict::divergent && right.v == Verdict::divergent) {
        tv.verdict = Verdict::divergent;
        tv.note = "hazard grows without sign of leveling in both tails";
    } else if (left.v == Verdict::finite || right.v == Verdict::finite) {
        tv.verdict = Verdict::finite;
        if (left.v == Verdict::finite && right.v == Verdict::finite)
            tv.value = std::min(left.value, right.value);
        else
            tv.value = left.v == Verdict::finite ? left.value : right.value;
        tv.note = "hazard stays bounded on at least one tail (value 0 marks a tail trending to 0)";
    } else {
        tv.verdict = Verdict::inconclusive;
        tv.note = "tail grids show no stable pattern";
    }
    return tv;
}

// Lower estimate c of inf{h(x) : |x| >= t}; the moment generating function
// is finite on (-c, c). Returns 0 when the deep-end trend keeps falling, in
// which case no positive radius can be certified from the grid.
inline double mgf_radius_bound(const DistributionModel& m, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("mgf_radius_bound: t must be >= 0");
    double c = kInf;
    bool any = false;
    for (Tail tail : {Tail::right, Tail::left}) {
        const double anchor = tail == Tail::right ? t : -t;
        const double mass = tail == Tail::right ? m.survival(anchor) : m.cdf(anchor);
        if (!(mass > 0.0)) continue;
        const auto grid = hazard_detail::tail_grid(m, anchor, tail);
        if (grid.empty()) continue;
        any = true;
        if (hazard_detail::trend_decreasing(grid)) return 0.0;
        for (const auto& pt : grid) c = std::min(c, pt.h);
    }
    return any ? c : 0.0;
}

struct ReconstructionReport {
    double direct = 0.0;
    double reconstructed = 0.0;
    bool satisfied = false;
};

// Checks survival(x) = survival(t) * exp(-integral of the classical right
// hazard over [t, x]) to 1e-6 relative.
inline ReconstructionReport survival_reconstruction_check(const DistributionModel& m, double t,
                                                          double x) {
    if (!(t <= x)) throw std::invalid_argument("survival_reconstruction_check: need t <= x");
    if (!(m.survival(t) > 0.0 && m.survival(x) > 0.0))
        throw std::domain_error("survival_reconstruction_check: points must carry survival mass");
    ReconstructionReport rep;
    rep.direct = m.survival(x);
    const auto cumulative = quad::integrate([&](double y) { return right_hazard(m, y); }, t, x,
                                            1e-10);
    rep.reconstructed = m.survival(t) * std::exp(-cumulative.value);
    rep.satisfied = std::fabs(rep.direct - rep.reconstructed) <= 1e-6 * rep.direct;
    return rep;
}

struct VarianceDecomposition {
    double random_part = 0.0;         // sum of (X_(i) - a_i)^2
    double deterministic_part = 0.0;  // n * sum of cell integrals of (Q - a_i)^2
    double n_d2_squared = 0.0;        // n * d_2(empirical, model)^2, computed independently
    double last_cell_lower_bound = 0.0;
};

// Splits n * d_2(F_n, F)^2 into the sampling part and the quantile
// dispersion part using the cell means a_i = n * integral of Q over
// ((i-1)/n, i/n). The two parts reconstruct n d_2^2 exactly up to rounding.
inline VarianceDecomposition variance_decomposition(const EmpiricalDistribution& sample,
                                                    const DistributionModel& m) {
    hazard_detail::require_second_moment(m);
    const std::size_t n = sample.size();
    const double nd = static_cast<double>(n);
    const auto xs = sample.values();

    std::vector<double> a(n), det(n), rnd(n);
    double prev_m1 = 0.0, prev_m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = i + 1 == n ? 1.0 : static_cast<double>(i + 1) / nd;
        double m1 = 0.0, m2 = 0.0;
        if (m.has_partial_moments()) {
            m.partial_moments(p, m1, m2);
        } else {
            const quad::Result c1 = quad::integrate(
                [&](double u) { return m.quantile(u); }, static_cast<double>(i) / nd, p, 1e-10);
            const quad::Result c2 = quad::integrate(
                [&](double u) { const double v = m.quantile(u); return v * v; },
                static_cast<double>(i) / nd, p, 1e-10);
            m1 = prev_m1 + c1.value;
            m2 = prev_m2 + c2.value;
        }
        const double d1 = m1 - prev_m1;
        const double d2 = m2 - prev_m2;
        a[i] = nd * d1;
        det[i] = std::max(0.0, nd * d2 - a[i] * a[i]);
        const double e = xs[i] - a[i];
        rnd[i] = e * e;
        prev_m1 = m1;
        prev_m2 = m2;
    }
    VarianceDecomposition out;
    out.random_part = stats::pairwise_sum(rnd);
    out.deterministic_part = stats::pairwise_sum(det);
    out.n_d2_squared = nd * distance(sample, m, 2.0).rth_power;
    const double t = n == 1 ? m.support_lower() : m.quantile(static_cast<double>(n - 1) / nd);
    const double last_gap = xs[n - 1] - a[n - 1];
    out.last_cell_lower_bound = last_gap * last_gap + tail_variance(m, t, Tail::right);
    return out;
}

}  // namespace mallows

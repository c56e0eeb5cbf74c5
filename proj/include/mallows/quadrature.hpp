#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstddef>
#include <utility>

// Thin wrapper around adaptive 15-point Gauss-Kronrod plus a panel scheme
// for integrals over (0, eps) whose integrand may blow up (integrably) at 0.
// Everything downstream integrates through this interface only, so swapping
// the backend is a one-file change.

namespace mallows::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;   // absolute error estimate
    bool converged = true;
};

// Adaptive Gauss-Kronrod on a finite interval. Nodes are interior, so the
// integrand is never evaluated at a or b.
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol = 1e-9, unsigned max_depth = 15) {
    if (!(a < b)) return {0.0, 0.0, true};
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        std::forward<F>(f), a, b, max_depth, rel_tol, &err);
    return {v, err, true};
}

// Integral of g over (0, eps) via the substitution t = exp(-u), which turns
// an endpoint singularity (or a slowly decaying transformed quantile) into a
// smooth exponentially weighted integrand on [u0, inf). Panels of one e-fold
// decade each are added until the latest panel contributes less than 1e-10
// of the running total; the final panel is folded into the error bound as a
// proxy for the discarded remainder.
template <class G>
Result integrate_decaying(G&& g, double eps, double rel_tol = 1e-9) {
    Result out;
    if (!(eps > 0.0)) return out;
    const double u_start = -std::log(eps);
    const double step = std::log(10.0);
    auto transformed = [&](double u) {
        const double t = std::exp(-u);
        if (t == 0.0) return 0.0;  // below subnormal range; avoid g(0) * 0
        return g(t) * t;
    };
    double u = u_start;
    constexpr int max_panels = 320;  // exp(-320*ln10) is far below double range
    int panel = 0;
    for (; panel < max_panels; ++panel) {
        const Result r = integrate(transformed, u, u + step, rel_tol);
        if (!std::isfinite(r.value)) {  // integrand blew past double range: not integrable
            out.converged = false;
            return out;
        }
        out.value += r.value;
        out.error += r.error;
        u += step;
        if (panel >= 1 && std::fabs(r.value) <= 1e-10 * std::fabs(out.value)) {
            out.error += std::fabs(r.value);
            break;
        }
        if (std::exp(-u) == 0.0) break;  // argument underflowed; nothing left
    }
    if (panel == max_panels) out.converged = false;
    return out;
}

}  // namespace mallows::quad

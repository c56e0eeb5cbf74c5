#pragma once

#include <cmath>
#include <stdexcept>

// Standard normal pdf/cdf/quantile with double precision accuracy across the
// whole support. The survival function is computed directly from erfc rather
// than as 1 - cdf so that deep right-tail masses keep full relative accuracy.

namespace mallows::gaussian {

inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;
inline constexpr double inv_sqrt_2 = 0.70710678118654752440;

inline double pdf(double z) {
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double cdf(double z) {
    return 0.5 * std::erfc(-z * inv_sqrt_2);
}

inline double survival(double z) {
    return 0.5 * std::erfc(z * inv_sqrt_2);
}

namespace detail {

// Rational approximations from Wichura's algorithm AS 241 (PPND16),
// absolute error below 1e-15 on (0,1).
inline double ppnd16_central(double q) {
    // |q| <= 0.425, q = p - 1/2
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
}

inline double ppnd16_tail(double r) {
    // r = sqrt(-log(min(p, 1-p))), r > 1.6
    if (r <= 5.0) {
        const double s = r - 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * s + 2.27238449892691845833e-2) * s +
                  2.41780725177450611770e-1) * s + 1.27045825245236838258e+0) * s +
                3.64784832476320460504e+0) * s + 5.76949722146069140550e+0) * s +
              4.63033784615654529590e+0) * s + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * s + 5.47593808499534494600e-4) * s +
                  1.51986665636164571966e-2) * s + 1.48103976427480074590e-1) * s +
                6.89767334985100004550e-1) * s + 1.67638483018380384940e+0) * s +
              2.05319162663775882187e+0) * s + 1.0);
        return num / den;
    }
    const double s = r - 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * s + 2.71155556874348757815e-5) * s +
              1.24266094738807843860e-3) * s + 2.65321895265761230930e-2) * s +
            2.96560571828504891230e-1) * s + 1.78482653991729133580e+0) * s +
          5.46378491116411436990e+0) * s + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * s + 1.42151175831644588870e-7) * s +
              1.84631831751005468180e-5) * s + 7.86869131145613259100e-4) * s +
            1.48753612908506148525e-2) * s + 1.36929880922735805310e-1) * s +
          5.99832206555887937690e-1) * s + 1.0);
    return num / den;
}

}  // namespace detail

// Inverse cdf for p in (0,1).
inline double quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("gaussian::quantile: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) return detail::ppnd16_central(q);
    const double tail_mass = q < 0.0 ? p : 1.0 - p;
    const double x = detail::ppnd16_tail(std::sqrt(-std::log(tail_mass)));
    return q < 0.0 ? -x : x;
}

// Inverse survival function: the z with survival(z) = q, for q in (0,1).
// Takes the upper-tail mass directly so callers never form 1 - p, which
// loses all precision once p is within an ulp of 1.
inline double quantile_from_upper(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("gaussian::quantile_from_upper: q must lie in (0,1)");
    if (q >= 0.5) return -quantile(q);  // left half: symmetry, q is not small there
    if (q >= 0.075) return detail::ppnd16_central(0.5 - q);
    return detail::ppnd16_tail(std::sqrt(-std::log(q)));
}

}  // namespace mallows::gaussian

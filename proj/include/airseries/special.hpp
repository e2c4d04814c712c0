#pragma once

#include <airseries/error.hpp>

#include <cmath>
#include <limits>

namespace airseries::special {

namespace detail {

inline constexpr int kMaxIterations = 10000;
inline constexpr double kEpsilon = 1e-16;

// Power series for the lower regularized gamma P(a, x); converges fast for x < a + 1.
inline double lower_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIterations; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEpsilon) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for the upper regularized gamma Q(a, x); x >= a + 1.
inline double upper_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEpsilon;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace detail

/// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) fail(ErrorKind::Validity, "gamma_q needs a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - detail::lower_series(a, x);
    return detail::upper_fraction(a, x);
}

/// Lower regularized incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) fail(ErrorKind::Validity, "gamma_p needs a > 0 and x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return detail::lower_series(a, x);
    return 1.0 - detail::upper_fraction(a, x);
}

/// P(X > x) for X ~ chi-square with `dof` degrees of freedom.
inline double chi_square_upper_tail(double x, double dof) {
    if (!(dof > 0.0)) fail(ErrorKind::DegreesOfFreedom, "chi-square needs positive degrees of freedom");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * x);
}

} // namespace airseries::special

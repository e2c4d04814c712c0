#pragma once

#include <airseries/error.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace airseries {

/// Gaussian log-likelihood with the innovation variance profiled out: -(n/2)(log(2 pi sse/n) + 1).
inline double profile_loglik(double sse, std::size_t n) {
    const double nn = static_cast<double>(n);
    return -0.5 * nn * (std::log(2.0 * std::numbers::pi * sse / nn) + 1.0);
}

inline double aic(double loglik, int k) { return -2.0 * loglik + 2.0 * k; }

/// Small-sample corrected AIC. Requires n > k + 1.
inline double aicc(double loglik, int k, std::size_t n) {
    const double nn = static_cast<double>(n);
    if (nn <= k + 1.0) {
        throw Error(ErrorKind::SmallSampleDof,
                    "AICc needs n > k + 1 (n = " + std::to_string(n) + ", k = " + std::to_string(k) + ")");
    }
    return aic(loglik, k) + 2.0 * k * (k + 1.0) / (nn - k - 1.0);
}

} // namespace airseries

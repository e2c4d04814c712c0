#pragma once

#include <airseries/error.hpp>
#include <airseries/series.hpp>
#include <airseries/special.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace airseries {

/// Coefficients for lags 1..L (lag 0 is implicitly 1).
struct Correlogram {
    std::vector<double> coefficients;
    std::size_t n = 0;
    double confidence_bound = 0.0;

    std::size_t max_lag() const { return coefficients.size(); }
    double at_lag(std::size_t k) const { return k == 0 ? 1.0 : coefficients.at(k - 1); }
};

struct WhiteNoiseTest {
    double statistic = 0.0;
    int lags_tested = 0;
    int dof = 0;
    double p_value = 1.0;

    bool rejects(double level = 0.05) const { return p_value < level; }
};

inline constexpr double kDefaultZ = 1.96;

/// Biased sample autocorrelations for lags 0..max_lag of raw values.
inline std::vector<double> autocorrelations(std::span<const double> y, std::size_t max_lag) {
    const auto n = y.size();
    if (n == 0 || max_lag >= n) fail(ErrorKind::LagBounds, "max lag must be smaller than the sample size");
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double c0 = 0.0;
    for (double v : y) c0 += (v - mean) * (v - mean);
    if (c0 == 0.0) fail(ErrorKind::DegenerateInput, "autocorrelation of a constant series is undefined");
    std::vector<double> r(max_lag + 1);
    r[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) ck += (y[t] - mean) * (y[t + k] - mean);
        r[k] = ck / c0;
    }
    return r;
}

inline Correlogram acf(const TimeSeries& series, std::size_t max_lag, double z = kDefaultZ) {
    const auto y = series.dense_values();
    auto r = autocorrelations(y, max_lag);
    const double n = static_cast<double>(y.size());
    return {std::vector<double>(r.begin() + 1, r.end()), y.size(), z / std::sqrt(n)};
}

/// Durbin-Levinson recursion: partial autocorrelations at lags 1..L from r_0..r_L.
inline std::vector<double> durbin_levinson(std::span<const double> r) {
    const std::size_t max_lag = r.size() - 1;
    std::vector<double> pacf(max_lag);
    std::vector<double> phi, prev;
    double v = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = r[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j - 1] * r[k - j];
        if (v <= 1e-14) fail(ErrorKind::NumericalDegeneracy, "Durbin-Levinson hit a unit pivot");
        const double a = num / v;
        phi.assign(k, 0.0);
        for (std::size_t j = 1; j < k; ++j) phi[j - 1] = prev[j - 1] - a * prev[k - j - 1];
        phi[k - 1] = a;
        v *= 1.0 - a * a;
        pacf[k - 1] = a;
        prev = phi;
    }
    return pacf;
}

inline Correlogram pacf(const TimeSeries& series, std::size_t max_lag, double z = kDefaultZ) {
    const auto y = series.dense_values();
    auto r = autocorrelations(y, max_lag);
    auto coeffs = durbin_levinson(r);
    for (auto& c : coeffs) c = std::clamp(c, -1.0, 1.0);
    return {std::move(coeffs), y.size(), z / std::sqrt(static_cast<double>(y.size()))};
}

/// Ljung-Box portmanteau test over lags 1..h with h - fitted_params degrees of freedom.
inline WhiteNoiseTest ljung_box(std::span<const double> residuals, int h, int fitted_params = 0) {
    if (h < 1) fail(ErrorKind::LagBounds, "Ljung-Box needs at least one lag");
    if (h <= fitted_params) fail(ErrorKind::DegreesOfFreedom, "lags tested must exceed fitted parameters");
    const auto n = residuals.size();
    if (static_cast<std::size_t>(h) >= n) fail(ErrorKind::LagBounds, "lags tested must be smaller than n");
    auto r = autocorrelations(residuals, static_cast<std::size_t>(h));
    const double nn = static_cast<double>(n);
    double q = 0.0;
    for (int j = 1; j <= h; ++j) q += r[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(j)] / (nn - j);
    q *= nn * (nn + 2.0);
    const int dof = h - fitted_params;
    return {q, h, dof, std::clamp(special::chi_square_upper_tail(q, dof), 0.0, 1.0)};
}

inline WhiteNoiseTest ljung_box(const TimeSeries& residuals, int h, int fitted_params = 0) {
    const auto e = residuals.dense_values();
    return ljung_box(std::span<const double>(e), h, fitted_params);
}

} // namespace airseries

#pragma once

#include <airseries/error.hpp>
#include <airseries/series.hpp>

#include <optional>
#include <vector>

namespace airseries {

/// Additive split observed = trend + seasonal + random. Trend and random are
/// missing for the first and last floor(m/2) months.
struct Decomposition {
    TimeSeries observed;
    TimeSeries trend;
    TimeSeries seasonal;
    TimeSeries random;
    std::vector<double> seasonal_indices; // by position modulo m, starting at observed.start()
};

/// Centered moving average of order m (2 x m for even m).
inline std::vector<std::optional<double>> centered_moving_average(const std::vector<double>& y, int m) {
    const auto n = y.size();
    const auto half = static_cast<std::size_t>(m / 2);
    std::vector<std::optional<double>> out(n);
    if (n < 2 * half + 1) return out;
    for (std::size_t t = half; t + half < n; ++t) {
        double sum = 0.0;
        if (m % 2 == 0) {
            sum = 0.5 * (y[t - half] + y[t + half]);
            for (std::size_t j = t - half + 1; j < t + half; ++j) sum += y[j];
        } else {
            for (std::size_t j = t - half; j <= t + half; ++j) sum += y[j];
        }
        out[t] = sum / m;
    }
    return out;
}

inline Decomposition classical_decompose(const TimeSeries& series, int m) {
    if (m < 2) fail(ErrorKind::Validity, "decomposition period must be >= 2");
    if (series.size() < static_cast<std::size_t>(2 * m)) {
        fail(ErrorKind::InsufficientData, "decomposition needs at least two full periods");
    }
    const auto y = series.dense_values();
    const auto n = y.size();
    const auto period = static_cast<std::size_t>(m);
    auto trend = centered_moving_average(y, m);

    std::vector<double> sums(period, 0.0);
    std::vector<int> counts(period, 0);
    for (std::size_t t = 0; t < n; ++t) {
        if (!trend[t]) continue;
        sums[t % period] += y[t] - *trend[t];
        ++counts[t % period];
    }
    std::vector<double> index(period);
    double centre = 0.0;
    for (std::size_t k = 0; k < period; ++k) {
        index[k] = sums[k] / counts[k];
        centre += index[k];
    }
    centre /= m;
    for (auto& s : index) s -= centre;

    std::vector<std::optional<double>> seasonal(n), random(n);
    for (std::size_t t = 0; t < n; ++t) {
        seasonal[t] = index[t % period];
        if (trend[t]) random[t] = y[t] - *trend[t] - index[t % period];
    }
    const auto start = series.start();
    return {series,
            TimeSeries(start, std::move(trend), series.period()),
            TimeSeries(start, std::move(seasonal), series.period()),
            TimeSeries(start, std::move(random), series.period()),
            std::move(index)};
}

} // namespace airseries

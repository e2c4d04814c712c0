#pragma once

#include <airseries/ingest.hpp>
#include <airseries/series.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace airseries {

/// Monthly PM2.5-like generator: linear trend + fixed zero-sum seasonal pattern + Gaussian noise.
struct SyntheticConfig {
    std::uint64_t seed = 1;
    MonthStamp start{2015, 1};
    std::size_t months = 60;
    double level = 24.0;
    double slope = 0.04;
    double noise_sd = 2.0;
    // High in late winter and spring, low in summer. Sums to zero.
    std::array<double, 12> seasonal{6.0, 7.0, 8.0, 3.0, 1.0, -2.0, -6.0, -8.0, -7.0, -4.0, 0.0, 2.0};
    double hourly_sd = 6.0;
    double missing_rate = 0.01;
};

inline TimeSeries synthetic_monthly(const SyntheticConfig& cfg, double offset = 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> values(cfg.months);
    for (std::size_t t = 0; t < cfg.months; ++t) {
        const auto month = cfg.start.plus(static_cast<long>(t)).month();
        values[t] = cfg.level + offset + cfg.slope * static_cast<double>(t) +
                    cfg.seasonal[static_cast<std::size_t>(month - 1)] + cfg.noise_sd * normal(rng);
    }
    return TimeSeries::dense(cfg.start, values);
}

/// Writes hourly records in the standard schema. Each station's PM2.5 hourly
/// readings scatter around its monthly series; other variables are generated
/// with plausible co-movement so correlation tables are non-trivial.
inline void write_synthetic_hourly_csv(std::ostream& out, const SyntheticConfig& cfg,
                                       const std::vector<std::string>& stations) {
    out << "timestamp,station";
    for (auto kind : kAllVariables) out << ',' << info(kind).column;
    out << '\n';

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    char buf[64];
    for (std::size_t s = 0; s < stations.size(); ++s) {
        const auto monthly = synthetic_monthly(cfg, 0.5 * static_cast<double>(s));
        std::mt19937_64 rng(cfg.seed * 7919u + s + 1);
        for (std::size_t t = 0; t < monthly.size(); ++t) {
            const auto month = monthly.month_at(t);
            const double base = *monthly[t];
            const int hours = hours_in_month(month);
            const double season_angle = 2.0 * std::numbers::pi * (month.month() - 1) / 12.0;
            for (int h = 0; h < hours; ++h) {
                const int day = h / 24 + 1;
                const int hour = h % 24;
                std::array<std::optional<double>, kVariableCount> r{};
                const double pm25 = std::max(0.0, base + cfg.hourly_sd * normal(rng));
                const double temp = 12.0 - 13.0 * std::cos(season_angle) + 4.0 * normal(rng);
                r[slot(VariableKind::PM25)] = pm25;
                r[slot(VariableKind::PM10)] = std::max(0.0, 1.8 * pm25 + 8.0 * normal(rng));
                r[slot(VariableKind::CO)] = std::max(0.0, 0.3 + 0.008 * pm25 + 0.05 * normal(rng));
                r[slot(VariableKind::SO2)] = std::max(0.0, 0.003 + 0.00005 * pm25 + 0.001 * normal(rng));
                r[slot(VariableKind::NO2)] = std::max(0.0, 0.02 + 0.0004 * pm25 + 0.006 * normal(rng));
                r[slot(VariableKind::O3)] = std::max(0.0, 0.025 + 0.0008 * temp + 0.008 * normal(rng));
                r[slot(VariableKind::CAI)] = std::max(0.0, 50.0 + 1.4 * pm25 + 6.0 * normal(rng));
                r[slot(VariableKind::Temperature)] = temp;
                r[slot(VariableKind::Precipitation)] = unit(rng) < 0.1 ? 4.0 * unit(rng) : 0.0;
                r[slot(VariableKind::WindSpeed)] = std::max(0.0, 2.5 - 0.02 * pm25 + 0.8 * normal(rng));
                r[slot(VariableKind::Pressure)] = 1013.0 + 0.05 * pm25 + 4.0 * normal(rng);
                r[slot(VariableKind::Visibility)] = std::max(0.0, 2000.0 - 25.0 * pm25 + 200.0 * normal(rng));

                std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:00", month.year(), month.month(), day, hour);
                out << buf << ',' << stations[s];
                for (std::size_t v = 0; v < kVariableCount; ++v) {
                    out << ',';
                    if (r[v] && unit(rng) >= cfg.missing_rate) {
                        std::snprintf(buf, sizeof buf, "%.6g", *r[v]);
                        out << buf;
                    }
                }
                out << '\n';
            }
        }
    }
}

} // namespace airseries

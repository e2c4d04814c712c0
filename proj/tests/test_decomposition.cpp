#include <airseries/decomposition.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace airseries;

namespace {

const std::vector<double> kPattern{6, 7, 8, 3, 1, -2, -6, -8, -7, -4, 0, 2};

std::vector<double> trend_plus_season(std::size_t n, double slope, const std::vector<double>& s) {
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = 20.0 + slope * static_cast<double>(t) + s[t % 12];
    return y;
}

} // namespace

TEST(ClassicalDecompose, ConstantSeries) {
    const auto d = classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), std::vector<double>(36, 7.0)), 12);
    for (std::size_t t = 0; t < 36; ++t) {
        EXPECT_NEAR(*d.seasonal[t], 0.0, 1e-12);
        if (d.trend[t]) {
            EXPECT_NEAR(*d.trend[t], 7.0, 1e-12);
            EXPECT_NEAR(*d.random[t], 0.0, 1e-12);
        }
    }
}

TEST(ClassicalDecompose, LinearRamp) {
    std::vector<double> y(48);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = 3.0 + 0.5 * static_cast<double>(t);
    const auto d = classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), y), 12);
    for (std::size_t t = 0; t < y.size(); ++t) {
        EXPECT_NEAR(*d.seasonal[t], 0.0, 1e-9);
        if (t >= 6 && t + 6 < y.size()) {
            ASSERT_TRUE(d.trend[t]);
            EXPECT_NEAR(*d.trend[t], y[t], 1e-9);
        } else {
            EXPECT_FALSE(d.trend[t]);
        }
    }
}

TEST(ClassicalDecompose, RecoversPlantedSeason) {
    const auto y = trend_plus_season(60, 0.1, kPattern);
    const auto d = classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), y), 12);
    const auto reference = oracle::seasonal_indices_12(y);
    for (std::size_t k = 0; k < 12; ++k) {
        EXPECT_NEAR(d.seasonal_indices[k], kPattern[k], 1e-6);
        EXPECT_NEAR(d.seasonal_indices[k], reference[k], 1e-6);
    }
}

TEST(ClassicalDecompose, AdditiveIdentityAndZeroSum) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto y = trend_plus_season(60, 0.05, kPattern);
        const auto noise = oracle::gaussian(60, seed, 0.0, 2.0);
        for (std::size_t t = 0; t < y.size(); ++t) y[t] += noise[t];
        const auto d = classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), y), 12);
        double sum = 0.0;
        for (double s : d.seasonal_indices) sum += s;
        EXPECT_NEAR(sum, 0.0, 1e-9);
        for (std::size_t t = 0; t < y.size(); ++t) {
            if (!d.trend[t]) continue;
            EXPECT_NEAR(*d.trend[t] + *d.seasonal[t] + *d.random[t], y[t], 1e-10);
        }
    }
}

TEST(ClassicalDecompose, OddPeriodAndErrors) {
    std::vector<double> y(21);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = static_cast<double>(t % 3);
    const auto d = classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), y), 3);
    EXPECT_NEAR(d.seasonal_indices[0], -1.0, 1e-12);
    EXPECT_NEAR(d.seasonal_indices[2], 1.0, 1e-12);
    EXPECT_THROW(classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), std::vector<double>(23, 1.0)), 12), Error);
    EXPECT_THROW(classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), y), 1), Error);
}

TEST(ClassicalDecompose, ShiftMovesOnlyTheTrend) {
    auto y = trend_plus_season(48, 0.2, kPattern);
    const auto noise = oracle::gaussian(48, 3, 0.0, 1.0);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] += noise[t];
    std::vector<double> shifted(y);
    for (auto& v : shifted) v += 9.0;
    const auto a = classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), y), 12);
    const auto b = classical_decompose(TimeSeries::dense(MonthStamp(2015, 1), shifted), 12);
    for (std::size_t t = 0; t < y.size(); ++t) {
        EXPECT_NEAR(*a.seasonal[t], *b.seasonal[t], 1e-10);
        EXPECT_NEAR(*a.seasonal[t], *a.seasonal[(t + 12) % 48], 1e-9);
        if (!a.trend[t]) continue;
        EXPECT_NEAR(*b.trend[t] - *a.trend[t], 9.0, 1e-10);
        EXPECT_NEAR(*a.random[t], *b.random[t], 1e-10);
    }
}

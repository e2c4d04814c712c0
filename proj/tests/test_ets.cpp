#include <airseries/ets.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace airseries;

namespace {

TimeSeries dense(const std::vector<double>& v) { return TimeSeries::dense(MonthStamp(2015, 1), v); }

const EtsSpec ANN = EtsSpec::parse("ANN");
const EtsSpec AAN = EtsSpec::parse("AAN");
const EtsSpec AAdN = EtsSpec::parse("AAdN");
const EtsSpec AAA = EtsSpec::parse("AAA");
const EtsSpec AAdA = EtsSpec::parse("AAdA");

std::vector<double> seasonal_series(std::uint64_t seed, std::size_t n = 48) {
    const std::vector<double> s{5, 6, 7, 2, 0, -2, -5, -7, -6, -3, 1, 2};
    auto y = oracle::gaussian(n, seed, 0.0, 1.5);
    for (std::size_t t = 0; t < n; ++t) y[t] += 25.0 + 0.05 * static_cast<double>(t) + s[t % 12];
    return y;
}

/// First-period mean level, trend from the first two periods, first-period seasonal deviations.
EtsState heuristic_state(const EtsSpec& spec, const std::vector<double>& y) {
    const std::size_t m = spec.has_seasonal() ? static_cast<std::size_t>(spec.period) : 4;
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        first += y[i] / static_cast<double>(m);
        second += y[m + i] / static_cast<double>(m);
    }
    EtsState s{first, spec.has_trend() ? (second - first) / static_cast<double>(m) : 0.0, {}};
    if (spec.has_seasonal()) {
        for (std::size_t i = 0; i < m; ++i) s.seasonal.push_back(y[i] - first);
    }
    return s;
}

double sse_of(const EtsFilterOutput& out) {
    double s = 0.0;
    for (const auto& e : out.residuals.values()) s += *e * *e;
    return s;
}

} // namespace

TEST(EtsSpec, NamesAndCounts) {
    EXPECT_EQ(AAdA.label(), "ETS(A,Ad,A)");
    EXPECT_EQ(AAdN.name(), "AAdN");
    EXPECT_EQ(EtsSpec::parse("ETS(A,Ad,A)"), AAdA);
    EXPECT_THROW(EtsSpec::parse("MNN"), Error);
    EXPECT_EQ(ets_parameter_count(ANN), 2);
    EXPECT_EQ(ets_parameter_count(AAN), 4);
    EXPECT_EQ(ets_parameter_count(AAdN), 5);
    EXPECT_EQ(ets_parameter_count(AAA), 4 + 12);
    EXPECT_EQ(ets_parameter_count(AAdA), 5 + 12);
    EXPECT_EQ(standard_ets_candidates().size(), 5u);
}

TEST(EtsFilter, HandRecursion) {
    const auto out = ets_filter(ANN, {0.5, 0, 0, 1}, {10.0, 0.0, {}}, dense({12}));
    EXPECT_EQ(*out.fitted[0], 10.0);
    EXPECT_EQ(*out.residuals[0], 2.0);
    EXPECT_EQ(out.final_state.level, 11.0);
}

TEST(EtsFilter, FullWeightIsNaive) {
    const auto y = oracle::gaussian(30, 2, 10.0, 3.0);
    const auto out = ets_filter(ANN, {EtsBounds::alpha_upper, 0, 0, 1}, {y[0], 0, {}}, dense(y));
    for (std::size_t t = 1; t < y.size(); ++t) EXPECT_NEAR(*out.fitted[t], y[t - 1], 1e-3 * 10.0);

    // alpha = 1 lies outside the fitting bounds but the recursion itself reduces to the naive forecast.
    std::vector<double> fitted(y.size()), errors(y.size());
    detail::ets_recursion(ANN, {1.0, 0, 0, 1}, {4.0, 0, {}}, y, fitted, errors);
    for (std::size_t t = 1; t < y.size(); ++t) EXPECT_NEAR(fitted[t], y[t - 1], 1e-12);
}

TEST(EtsFilter, SmallAlphaFreezesLevel) {
    const auto y = oracle::gaussian(40, 3, 10.0, 3.0);
    const double alpha = EtsBounds::lower;
    const auto out = ets_filter(ANN, {alpha, 0, 0, 1}, {10.0, 0, {}}, dense(y));
    double max_e = 0.0;
    for (const auto& e : out.residuals.values()) max_e = std::max(max_e, std::fabs(*e));
    for (const auto& f : out.fitted.values()) EXPECT_NEAR(*f, 10.0, alpha * 40 * max_e);
}

TEST(EtsFilter, TranslationEquivariance) {
    const auto y = seasonal_series(4);
    std::vector<double> shifted(y);
    for (auto& v : shifted) v += 100.0;
    EtsState init = heuristic_state(AAdA, y);
    const EtsParams p{0.3, 0.05, 0.1, 0.9};
    const auto a = ets_filter(AAdA, p, init, dense(y));
    init.level += 100.0;
    const auto b = ets_filter(AAdA, p, init, dense(shifted));
    for (std::size_t t = 0; t < y.size(); ++t) EXPECT_NEAR(*a.residuals[t], *b.residuals[t], 1e-10);
}

TEST(EtsForecast, FlatLinearAndDamped) {
    EXPECT_EQ(ets_point_forecast(ANN, {0.5, 0, 0, 1}, {11.0, 0, {}}, 12), std::vector<double>(12, 11.0));
    EXPECT_EQ(ets_point_forecast(AAN, {0.5, 0.1, 0, 1}, {10.0, 2.0, {}}, 3), (std::vector<double>{12, 14, 16}));
    const auto damped = ets_point_forecast(AAdN, {0.5, 0.1, 0, 0.9}, {10.0, 2.0, {}}, 2);
    EXPECT_NEAR(damped[0], 11.8, 1e-12);
    EXPECT_NEAR(damped[1], 13.42, 1e-12);
    const auto long_run = ets_point_forecast(AAdN, {0.5, 0.1, 0, 0.9}, {10.0, 2.0, {}}, 40);
    for (int h = 1; h <= 40; ++h) {
        const double closed = 10.0 + 2.0 * 0.9 * (1.0 - std::pow(0.9, h)) / (1.0 - 0.9);
        EXPECT_NEAR(long_run[static_cast<std::size_t>(h - 1)], closed, 1e-12);
    }
}

TEST(EtsForecast, FilterConsistency) {
    const auto y = seasonal_series(5);
    const auto fit = ets_fit(AAdA, dense(y));
    const auto fc = ets_forecast(fit, 12);
    const auto extended = concatenate(dense(y), fc.point);
    const auto out = ets_filter(AAdA, fit.params, fit.initial_state, extended);
    for (std::size_t h = 0; h < 12; ++h) {
        EXPECT_NEAR(*out.fitted[y.size() + h], *fc.point[h], 1e-10);
        EXPECT_NEAR(*out.residuals[y.size() + h], 0.0, 1e-10);
    }
    for (std::size_t h = 1; h < 12; ++h) EXPECT_GE(*fc.upper[h] - *fc.lower[h], *fc.upper[h - 1] - *fc.lower[h - 1]);
}

TEST(EtsFit, AlphaRecovery) {
    int good = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto e = oracle::gaussian(480, 1000 + s);
        std::vector<double> y(480);
        double level = 20.0;
        for (std::size_t t = 0; t < y.size(); ++t) {
            y[t] = level + e[t];
            level += 0.3 * e[t];
        }
        good += std::fabs(ets_fit(ANN, dense(y)).params.alpha - 0.3) <= 0.1;
    }
    EXPECT_GE(good, 16);
}

TEST(EtsFit, ConstantSeriesFitsExactly) {
    const auto fit = ets_fit(ANN, dense(std::vector<double>(24, 7.5)));
    for (const auto& f : fit.fitted.values()) EXPECT_NEAR(*f, 7.5, 1e-9);
    EXPECT_NEAR(fit.sse, 0.0, 1e-12);
}

TEST(EtsFit, BeatsHeuristicGrid) {
    const std::vector<double> alphas{0.1, 0.3, 0.5, 0.7, 0.9}, fractions{0.05, 0.2, 0.4, 0.6, 0.8}, phis{0.8, 0.9, 0.98};
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto y = seasonal_series(200 + s);
        for (const auto& spec : standard_ets_candidates()) {
            const auto fit = ets_fit(spec, dense(y));
            const auto init = heuristic_state(spec, y);
            double grid_best = std::numeric_limits<double>::infinity();
            for (double a : alphas) {
                for (double bf : spec.has_trend() ? fractions : std::vector<double>{0}) {
                    for (double gf : spec.has_seasonal() ? fractions : std::vector<double>{0}) {
                        for (double ph : spec.damped() ? phis : std::vector<double>{1}) {
                            EtsParams p{a, std::max(EtsBounds::lower, bf * a), std::max(EtsBounds::lower, gf * (1 - a)), ph};
                            grid_best = std::min(grid_best, sse_of(ets_filter(spec, p, init, dense(y))));
                        }
                    }
                }
            }
            EXPECT_LE(fit.sse, grid_best * (1 + 1e-9)) << spec.label() << " seed " << s;
        }
    }
}

TEST(EtsFit, ReportsCriteria) {
    const auto y = seasonal_series(9);
    const auto fit = ets_fit(AAdA, dense(y));
    EXPECT_EQ(fit.k, 17);
    EXPECT_EQ(fit.n, 48u);
    EXPECT_NEAR(fit.aicc, aicc(fit.loglik, fit.k, fit.n), 1e-12);
    EXPECT_NO_THROW(validate_params(AAdA, fit.params));
    double sum = 0.0;
    for (double s : fit.initial_state.seasonal) sum += s;
    EXPECT_NEAR(sum, 0.0, 1e-9);
}

TEST(EtsFit, Errors) {
    EXPECT_THROW(ets_fit(AAA, dense(seasonal_series(1, 20))), Error);
    EXPECT_THROW(validate_params(AAN, {0.5, 0.6, 0, 1}), Error);
    EXPECT_THROW(validate_params(AAdN, {0.5, 0.1, 0, 0.5}), Error);
}

TEST(EtsFit, TranslationEquivariance) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto y = seasonal_series(300 + s);
        std::vector<double> shifted(y);
        for (auto& v : shifted) v += 50.0;
        for (const auto& spec : {ANN, AAdN, AAdA}) {
            const auto a = ets_fit(spec, dense(y));
            const auto b = ets_fit(spec, dense(shifted));
            EXPECT_NEAR(a.params.alpha, b.params.alpha, 1e-4) << spec.label();
            EXPECT_NEAR(b.final_state.level - a.final_state.level, 50.0, 1e-4);
            const auto fa = ets_forecast(a, 12), fb = ets_forecast(b, 12);
            for (std::size_t h = 0; h < 12; ++h) EXPECT_NEAR(*fb.point[h] - *fa.point[h], 50.0, 1e-6) << spec.label();
        }
    }
}

TEST(EtsForecast, DampedTrendLevelsOff) {
    const double phi = 0.9, level = 10.0, trend = 2.0;
    const double limit = level + trend * phi / (1 - phi);
    const auto f = ets_point_forecast(AAdN, {0.5, 0.1, 0, phi}, {level, trend, {}}, 400);
    for (std::size_t h = 1; h < f.size(); ++h) EXPECT_GE(f[h], f[h - 1] - 1e-12);
    for (double v : f) EXPECT_LE(v, limit + 1e-9);
    EXPECT_NEAR(f.back(), limit, 1e-9);
}

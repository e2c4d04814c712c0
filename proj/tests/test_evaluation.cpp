#include <airseries/arima.hpp>
#include <airseries/criteria.hpp>
#include <airseries/ets.hpp>
#include <airseries/evaluation.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <bit>

using namespace airseries;

namespace {

TimeSeries dense(const std::vector<double>& v, MonthStamp start = {2015, 1}) {
    return TimeSeries::dense(start, v);
}

ModelRun naive_run(const TimeSeries& train, int h) {
    const auto y = train.dense_values();
    std::vector<double> fitted(y.begin(), y.end() - 1);
    return {TimeSeries::dense(train.start().plus(1), fitted), dense(std::vector<double>(h, y.back()), train.end())};
}

ModelRun seasonal_naive_run(const TimeSeries& train, int h) {
    const auto y = train.dense_values();
    std::vector<double> fitted(y.begin(), y.end() - 12), forecast;
    for (int i = 0; i < h; ++i) forecast.push_back(y[y.size() - 12 + static_cast<std::size_t>(i % 12)]);
    return {TimeSeries::dense(train.start().plus(12), fitted), dense(forecast, train.end())};
}

ComparisonEntry entry(std::string label, double test_rmse, std::optional<double> aicc = std::nullopt, int k = 1) {
    ComparisonEntry e;
    e.label = std::move(label);
    e.family = "ARIMA";
    e.k = k;
    e.aicc = aicc;
    e.test.rmse = test_rmse;
    return e;
}

} // namespace

TEST(Metrics, HandCase) {
    const auto m = compute_metrics(dense({10, 20}), dense({12, 18}));
    EXPECT_NEAR(m.me, 0.0, 1e-12);
    EXPECT_NEAR(m.rmse, 2.0, 1e-12);
    EXPECT_NEAR(m.mae, 2.0, 1e-12);
    EXPECT_NEAR(*m.mpe, -5.0, 1e-12);
    EXPECT_NEAR(*m.mape, 15.0, 1e-12);
}

TEST(Metrics, PerfectForecast) {
    const auto m = compute_metrics(dense({3, 4, 5}), dense({3, 4, 5}));
    EXPECT_EQ(m.me, 0.0);
    EXPECT_EQ(m.rmse, 0.0);
    EXPECT_EQ(m.mae, 0.0);
    EXPECT_EQ(*m.mpe, 0.0);
    EXPECT_EQ(*m.mape, 0.0);
}

TEST(Metrics, ZeroActualLeavesPercentagesUndefined) {
    const auto m = compute_metrics(dense({0, 2}), dense({1, 2}));
    EXPECT_FALSE(m.mpe);
    EXPECT_THROW(m.require_mape(), Error);
    EXPECT_THROW(compute_metrics(dense({1, 2}), dense({1, 2}, {2015, 2})), Error);
}

TEST(Metrics, OrderingIdentities) {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> len(1, 40);
    std::uniform_real_distribution<double> value(0.5, 100.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(len(rng));
        std::vector<double> a(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = value(rng);
            p[i] = value(rng);
        }
        const auto m = compute_metrics(dense(a), dense(p));
        EXPECT_GE(m.rmse + 1e-12, m.mae);
        EXPECT_GE(m.mae + 1e-12, std::fabs(m.me));
        EXPECT_GE(*m.mape + 1e-12, std::fabs(*m.mpe));
    }
}

TEST(Metrics, ScaleEquivariance) {
    const auto a = oracle::gaussian(20, 1, 50.0, 5.0), p = oracle::gaussian(20, 2, 50.0, 5.0);
    std::vector<double> a3(a), p3(p);
    for (auto& v : a3) v *= 3.0;
    for (auto& v : p3) v *= 3.0;
    const auto m = compute_metrics(dense(a), dense(p)), m3 = compute_metrics(dense(a3), dense(p3));
    EXPECT_NEAR(m3.rmse, 3.0 * m.rmse, 1e-10);
    EXPECT_NEAR(m3.me, 3.0 * m.me, 1e-10);
    EXPECT_NEAR(*m3.mape, *m.mape, 1e-10);
}

TEST(Aicc, Formula) {
    EXPECT_NEAR(aicc(0.0, 2, 10), 4.0 + 12.0 / 7.0, 1e-12);
    EXPECT_NEAR(aicc(0.0, 2, 10), 5.714286, 1e-6);
    EXPECT_NEAR(aicc(0.0, 1, 1000000), 2.0, 1e-5);
    for (int k = 1; k < 8; ++k) EXPECT_LT(aicc(-20.0, k, 10), aicc(-20.0, k + 1, 10));
    EXPECT_THROW(aicc(0.0, 9, 10), Error);
}

TEST(Holdout, NaiveOnConstantSeries) {
    const auto h = holdout_evaluate(naive_run, dense(std::vector<double>(60, 8.0)), MonthStamp(2019, 1));
    EXPECT_EQ(h.train.rmse, 0.0);
    EXPECT_EQ(h.test.rmse, 0.0);
    EXPECT_EQ(h.test.n, 12u);
}

TEST(Holdout, SeasonalNaiveOnPeriodicSeries) {
    std::vector<double> y(60);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = 10.0 + static_cast<double>((t * 7) % 12);
    const auto h = holdout_evaluate(seasonal_naive_run, dense(y), MonthStamp(2019, 1));
    EXPECT_EQ(h.test.me, 0.0);
    EXPECT_EQ(h.test.rmse, 0.0);
    EXPECT_EQ(h.test.mae, 0.0);
    EXPECT_EQ(*h.test.mpe, 0.0);
    EXPECT_EQ(*h.test.mape, 0.0);
}

TEST(Holdout, TestValuesNeverReachTheFitter) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto y = oracle::gaussian(60, 60 + seed, 25.0, 3.0);
        std::vector<std::uint64_t> bits[2];
        for (int pass = 0; pass < 2; ++pass) {
            if (pass == 1) {
                for (std::size_t t = 48; t < 60; ++t) y[t] = 1000.0 - y[t];
            }
            std::optional<EtsFit> ets;
            std::optional<ArimaFit> arima;
            holdout_evaluate(
                [&](const TimeSeries& tr, int hz) {
                    ets = ets_fit(EtsSpec::parse("AAdA"), tr);
                    return ModelRun{ets->fitted, ets_forecast(*ets, hz).point};
                },
                dense(y), MonthStamp(2019, 1));
            holdout_evaluate(
                [&](const TimeSeries& tr, int hz) {
                    arima = arima_fit(ArimaSpec::make(2, 1, 1), tr);
                    return ModelRun{arima->fitted, arima_forecast(*arima, hz).point};
                },
                dense(y), MonthStamp(2019, 1));
            for (double v : {ets->params.alpha, ets->params.beta, ets->params.gamma, ets->params.phi, ets->sse,
                             arima->coefficients.phi[0], arima->coefficients.phi[1], arima->coefficients.theta[0],
                             arima->css}) {
                bits[pass].push_back(std::bit_cast<std::uint64_t>(v));
            }
        }
        EXPECT_EQ(bits[0], bits[1]);
    }
}

TEST(CompareModels, SingleEntryWinsEverything) {
    auto r = compare_models({entry("only", 1.0, 10.0)});
    for (const auto& [criterion, label] : r.winner_by) EXPECT_EQ(label, "only");
    EXPECT_EQ(r.winner_by.count("rmse-test"), 1u);
}

TEST(CompareModels, LowerTestRmseWins) {
    auto r = compare_models({entry("ETS(A,Ad,A)", 5.837), entry("ARIMA(0,0,0)(0,1,0)[12]", 7.732)});
    EXPECT_EQ(r.winner_by.at("rmse-test"), "ETS(A,Ad,A)");
}

TEST(CompareModels, AiccTieGoesToFewerParameters) {
    auto a = entry("ARIMA(2,1,2)", 1.0, 580.73, 6);
    auto b = entry("ARIMA(2,1,1)", 1.0, 580.73, 5);
    a.differencing = b.differencing = {1, 0, 12};
    auto r = compare_models({a, b});
    EXPECT_EQ(r.winner_by.at("aicc:ARIMA(d=1,D=0)"), "ARIMA(2,1,1)");
    auto forced = compare_models({a, b}, {true});
    EXPECT_EQ(forced.winner_by.at("aicc"), "ARIMA(2,1,1)");
}

TEST(CompareModels, AiccGroupsByDifferencing) {
    auto a = entry("ARIMA(2,0,0)", 1.0, 100.0);
    auto b = entry("ARIMA(2,1,0)", 1.0, 50.0);
    b.differencing = {1, 0, 12};
    auto r = compare_models({a, b});
    EXPECT_EQ(r.winner_by.at("aicc:ARIMA(d=0,D=0)"), "ARIMA(2,0,0)");
    EXPECT_EQ(r.winner_by.at("aicc:ARIMA(d=1,D=0)"), "ARIMA(2,1,0)");
    EXPECT_EQ(r.winner_by.count("aicc"), 0u);
}

TEST(CompareModels, TableLayout) {
    auto r = compare_models({entry("ETS(A,Ad,A)", 5.837), entry("ARIMA(0,0,0)(0,1,0)[12]", 7.732)});
    const auto text = format_comparison_table(r);
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_NE(lines[0].find("Models"), std::string::npos);
    for (auto h : {"ME", "RMSE", "MAE", "MPE", "MAPE"}) EXPECT_NE(lines[0].find(h), std::string::npos);
    EXPECT_NE(lines[1].find("Training set"), std::string::npos);
    EXPECT_NE(lines[2].find("Test set"), std::string::npos);
    EXPECT_NE(lines[2].find("5.837"), std::string::npos);
    EXPECT_NE(lines[4].find("7.732"), std::string::npos);
}

TEST(Aicc, CorrectionTermExact) {
    for (int k = 1; k < 8; ++k) {
        const double n = 40.0;
        EXPECT_NEAR(aicc(-55.5, k, 40) - aic(-55.5, k), 2.0 * k * (k + 1) / (n - k - 1), 1e-12);
    }
}

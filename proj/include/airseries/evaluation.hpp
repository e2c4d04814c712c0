#pragma once

#include <airseries/criteria.hpp>
#include <airseries/error.hpp>
#include <airseries/series.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace airseries {

/// ME, RMSE, MAE, MPE and MAPE. Percentages are empty when an actual value is zero.
struct MetricSet {
    double me = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> mpe;
    std::optional<double> mape;
    std::size_t n = 0;

    double require_mpe() const {
        if (!mpe) fail(ErrorKind::PercentageUndefined, "MPE is undefined when an actual value is zero");
        return *mpe;
    }
    double require_mape() const {
        if (!mape) fail(ErrorKind::PercentageUndefined, "MAPE is undefined when an actual value is zero");
        return *mape;
    }
};

/// Errors are actual - predicted; percentages are 100 * error / actual.
inline MetricSet compute_metrics(const TimeSeries& actual, const TimeSeries& predicted) {
    if (actual.size() != predicted.size() || actual.start() != predicted.start()) {
        fail(ErrorKind::Misaligned, "actual and predicted must share a calendar span");
    }
    if (actual.empty()) fail(ErrorKind::InsufficientData, "metrics need at least one point");
    const auto a = actual.dense_values();
    const auto p = predicted.dense_values();
    const double n = static_cast<double>(a.size());
    double sum_e = 0.0, sum_sq = 0.0, sum_abs = 0.0, sum_pe = 0.0, sum_ape = 0.0;
    bool zero_actual = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - p[i];
        sum_e += e;
        sum_sq += e * e;
        sum_abs += std::fabs(e);
        if (a[i] == 0.0) {
            zero_actual = true;
        } else {
            sum_pe += e / a[i];
            sum_ape += std::fabs(e / a[i]);
        }
    }
    MetricSet out;
    out.n = a.size();
    out.me = sum_e / n;
    out.rmse = std::sqrt(sum_sq / n);
    out.mae = sum_abs / n;
    if (!zero_actual) {
        out.mpe = 100.0 * sum_pe / n;
        out.mape = 100.0 * sum_ape / n;
    }
    return out;
}

/// In-sample fitted values and out-of-sample forecasts produced by one model.
struct ModelRun {
    TimeSeries fitted;
    TimeSeries forecast;
};

/// Fits on the training part only and returns (fitted, forecast).
using Fitter = std::function<ModelRun(const TimeSeries& train, int horizon)>;

struct HoldoutResult {
    MetricSet train;
    MetricSet test;
    ModelRun run;
    TimeSeries train_series;
    TimeSeries test_series;
};

/// Train metrics compare fitted values to the training actuals over the fitted
/// span; test metrics compare forecasts to the held-out actuals. The fitter only
/// ever sees the training slice.
inline HoldoutResult holdout_evaluate(const Fitter& fitter, const TimeSeries& series, MonthStamp cut,
                                      std::optional<int> horizon = std::nullopt) {
    auto [train, test] = split_at(series, cut);
    if (test.empty()) fail(ErrorKind::SplitBounds, "empty test period");
    const int h = horizon.value_or(static_cast<int>(test.size()));
    if (h < 1) fail(ErrorKind::Validity, "forecast horizon must be >= 1");

    HoldoutResult out;
    out.run = fitter(train, h);
    const auto& fitted = out.run.fitted;
    auto offset = train.index_of(fitted.start());
    if (!offset || *offset + fitted.size() > train.size()) {
        fail(ErrorKind::Misaligned, "fitted values fall outside the training period");
    }
    out.train = compute_metrics(train.slice(*offset, fitted.size()), fitted);

    const std::size_t compare = std::min<std::size_t>(static_cast<std::size_t>(h), test.size());
    if (out.run.forecast.start() != test.start() || out.run.forecast.size() < compare) {
        fail(ErrorKind::Misaligned, "forecast does not start at the first test month");
    }
    out.test = compute_metrics(test.slice(0, compare), out.run.forecast.slice(0, compare));
    out.train_series = std::move(train);
    out.test_series = std::move(test);
    return out;
}

/// One model's row pair in a comparison.
struct ComparisonEntry {
    std::string label;
    std::string family;      // e.g. "ETS", "ARIMA"
    DifferenceSpec differencing; // orders applied before fitting; zero for ETS
    int k = 0;
    std::optional<double> aicc;
    MetricSet train;
    MetricSet test;
};

struct ComparisonReport {
    std::vector<ComparisonEntry> entries;
    std::map<std::string, std::string> winner_by; // criterion -> label
};

struct CompareOptions {
    bool force_aicc = false;
};

namespace detail {

inline std::string aicc_group(const ComparisonEntry& e) {
    return e.family + "(d=" + std::to_string(e.differencing.d) + ",D=" + std::to_string(e.differencing.D) + ")";
}

/// Lowest score wins; ties go to fewer parameters, then declaration order.
inline std::optional<std::size_t> pick_winner(const std::vector<ComparisonEntry>& entries,
                                              const std::function<std::optional<double>(const ComparisonEntry&)>& score,
                                              const std::function<bool(const ComparisonEntry&)>& eligible) {
    std::optional<std::size_t> best;
    std::optional<double> best_score;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!eligible(entries[i])) continue;
        const auto s = score(entries[i]);
        if (!s || std::isnan(*s)) continue;
        if (!best || *s < *best_score || (*s == *best_score && entries[i].k < entries[*best].k)) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

} // namespace detail

/// Per-criterion winners. ME and MPE rank by magnitude. AICc is ranked only
/// within groups sharing a family and differencing orders unless forced.
inline ComparisonReport compare_models(std::vector<ComparisonEntry> entries, const CompareOptions& options = {}) {
    ComparisonReport report;
    report.entries = std::move(entries);
    const auto& list = report.entries;
    auto all = [](const ComparisonEntry&) { return true; };

    using Getter = std::function<std::optional<double>(const MetricSet&)>;
    const std::vector<std::pair<std::string, Getter>> metrics{
        {"me", [](const MetricSet& m) -> std::optional<double> { return std::fabs(m.me); }},
        {"rmse", [](const MetricSet& m) -> std::optional<double> { return m.rmse; }},
        {"mae", [](const MetricSet& m) -> std::optional<double> { return m.mae; }},
        {"mpe", [](const MetricSet& m) -> std::optional<double> {
             return m.mpe ? std::optional<double>(std::fabs(*m.mpe)) : std::nullopt;
         }},
        {"mape", [](const MetricSet& m) -> std::optional<double> { return m.mape; }},
    };
    for (const auto& [name, get] : metrics) {
        if (auto w = detail::pick_winner(list, [&](const ComparisonEntry& e) { return get(e.train); }, all)) {
            report.winner_by[name + "-train"] = list[*w].label;
        }
        if (auto w = detail::pick_winner(list, [&](const ComparisonEntry& e) { return get(e.test); }, all)) {
            report.winner_by[name + "-test"] = list[*w].label;
        }
    }

    auto aicc_of = [](const ComparisonEntry& e) { return e.aicc; };
    if (options.force_aicc) {
        if (auto w = detail::pick_winner(list, aicc_of, all)) report.winner_by["aicc"] = list[*w].label;
    } else {
        std::vector<std::string> groups;
        for (const auto& e : list) {
            auto g = detail::aicc_group(e);
            if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
        }
        for (const auto& g : groups) {
            auto in_group = [&](const ComparisonEntry& e) { return detail::aicc_group(e) == g; };
            if (auto w = detail::pick_winner(list, aicc_of, in_group)) report.winner_by["aicc:" + g] = list[*w].label;
        }
    }
    return report;
}

/// Aligned text table with a training and a test row per model.
inline std::string format_comparison_table(const ComparisonReport& report) {
    std::size_t width = 6;
    for (const auto& e : report.entries) width = std::max(width, e.label.size());
    auto number = [](std::optional<double> v) {
        char buf[32];
        if (v) {
            std::snprintf(buf, sizeof buf, "%10.3f", *v);
        } else {
            std::snprintf(buf, sizeof buf, "%10s", "NA");
        }
        return std::string(buf);
    };
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    std::string out = pad("Models", width) + "  " + pad("Dataset", 12);
    for (auto h : {"ME", "RMSE", "MAE", "MPE", "MAPE"}) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%10s", h);
        out += buf;
    }
    out += '\n';
    for (const auto& e : report.entries) {
        const std::pair<const char*, const MetricSet*> rows[] = {{"Training set", &e.train}, {"Test set", &e.test}};
        bool first = true;
        for (const auto& [name, m] : rows) {
            out += pad(first ? e.label : "", width) + "  " + pad(name, 12);
            out += number(m->me) + number(m->rmse) + number(m->mae) + number(m->mpe) + number(m->mape);
            out += '\n';
            first = false;
        }
    }
    return out;
}

} // namespace airseries

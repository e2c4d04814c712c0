#pragma once

#include <airseries/arima.hpp>
#include <airseries/correlogram.hpp>
#include <airseries/decomposition.hpp>
#include <airseries/error.hpp>
#include <airseries/ets.hpp>
#include <airseries/evaluation.hpp>
#include <airseries/forecast.hpp>
#include <airseries/ingest.hpp>
#include <airseries/series.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace airseries {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

/// Reads a `month,value` file. Empty values are missing; months must be consecutive.
inline TimeSeries read_monthly_csv(std::istream& in, int period = 12) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Schema, "monthly CSV is empty");
    auto header = detail::split_csv_line(line);
    if (header.size() < 2 || detail::trim(header[0]) != "month") {
        fail(ErrorKind::Schema, "monthly CSV needs a 'month,value' header");
    }
    std::optional<MonthStamp> start;
    std::vector<std::optional<double>> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        const auto month = MonthStamp::parse(detail::trim(fields[0]));
        if (!start) {
            start = month;
        } else if (month != start->plus(static_cast<long>(values.size()))) {
            fail(ErrorKind::Schema, "row " + std::to_string(row) + ": months must be consecutive");
        }
        values.push_back(fields.size() > 1 ? detail::parse_number(fields[1]) : std::nullopt);
    }
    if (!start) fail(ErrorKind::Schema, "monthly CSV has no rows");
    return TimeSeries(*start, std::move(values), period);
}

inline void write_monthly_csv(std::ostream& out, const TimeSeries& series) {
    out << "month,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.month_at(i).to_string() << ',' << format_number(series[i]) << '\n';
    }
}

inline void write_decomposition_csv(std::ostream& out, const Decomposition& d) {
    out << "month,observed,trend,seasonal,random\n";
    for (std::size_t i = 0; i < d.observed.size(); ++i) {
        out << d.observed.month_at(i).to_string() << ',' << format_number(d.observed[i]) << ','
            << format_number(d.trend[i]) << ',' << format_number(d.seasonal[i]) << ',' << format_number(d.random[i])
            << '\n';
    }
}

inline void write_correlogram_csv(std::ostream& out, const Correlogram& c) {
    out << "lag,value,bound\n";
    for (std::size_t k = 1; k <= c.max_lag(); ++k) {
        out << k << ',' << format_number(c.at_lag(k)) << ',' << format_number(c.confidence_bound) << '\n';
    }
}

inline void write_forecast_csv(std::ostream& out, const Forecast& f) {
    out << "month,point,lower,upper\n";
    for (std::size_t i = 0; i < f.point.size(); ++i) {
        out << f.point.month_at(i).to_string() << ',' << format_number(f.point[i]) << ','
            << format_number(f.lower[i]) << ',' << format_number(f.upper[i]) << '\n';
    }
}

inline void write_station_table_csv(std::ostream& out, const StationTable& t) {
    out << "station";
    for (auto v : t.variables) out << ',' << info(v).column;
    out << '\n';
    for (std::size_t i = 0; i < t.stations.size(); ++i) {
        out << t.stations[i];
        for (std::size_t j = 0; j < t.variables.size(); ++j) out << ',' << format_number(t.cells[i][j]);
        out << '\n';
    }
}

/// Generic header + rows table, for reading back any emitted CSV.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        fail(ErrorKind::Schema, "missing column '" + std::string(name) + "'");
    }

    std::optional<double> number(std::size_t row, std::string_view name) const {
        return detail::parse_number(rows.at(row).at(column(name)));
    }
};

inline CsvTable read_csv_table(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Schema, "CSV is empty");
    for (auto& h : detail::split_csv_line(line)) t.header.emplace_back(detail::trim(h));
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        for (auto& f : fields) f = std::string(detail::trim(f));
        if (fields.size() != t.header.size()) fail(ErrorKind::Schema, "ragged CSV row");
        t.rows.push_back(std::move(fields));
    }
    return t;
}

// ---------------------------------------------------------------------------
// JSON

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline json number_or_null(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

inline double number_from(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

inline json values_json(const TimeSeries& s) {
    json arr = json::array();
    for (const auto& v : s.values()) arr.push_back(number_or_null(v));
    return arr;
}

inline json series_json(const TimeSeries& s) {
    return {{"start", s.start().to_string()}, {"period", s.period()}, {"values", values_json(s)}};
}

inline TimeSeries series_from_json(const json& j) {
    std::vector<std::optional<double>> values;
    for (const auto& v : j.at("values")) {
        values.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    }
    return TimeSeries(MonthStamp::parse(j.at("start").get<std::string>()), std::move(values),
                      j.value("period", 12));
}

inline json to_json(const MetricSet& m) {
    return {{"me", number_or_null(m.me)},   {"rmse", number_or_null(m.rmse)}, {"mae", number_or_null(m.mae)},
            {"mpe", number_or_null(m.mpe)}, {"mape", number_or_null(m.mape)}, {"n", m.n}};
}

inline MetricSet metrics_from_json(const json& j) {
    MetricSet m;
    m.me = number_from(j.at("me"));
    m.rmse = number_from(j.at("rmse"));
    m.mae = number_from(j.at("mae"));
    if (!j.at("mpe").is_null()) m.mpe = j.at("mpe").get<double>();
    if (!j.at("mape").is_null()) m.mape = j.at("mape").get<double>();
    m.n = j.value("n", std::size_t{0});
    return m;
}

inline json to_json(const WhiteNoiseTest& t) {
    return {{"schema_version", kSchemaVersion},
            {"statistic", number_or_null(t.statistic)},
            {"lags", t.lags_tested},
            {"dof", t.dof},
            {"p_value", number_or_null(t.p_value)},
            {"white_noise_at_5pct", !t.rejects(0.05)}};
}

inline json to_json(const EtsState& s) {
    return {{"level", s.level}, {"trend", s.trend}, {"seasonal", s.seasonal}};
}

inline EtsState ets_state_from_json(const json& j) {
    return {j.at("level").get<double>(), j.at("trend").get<double>(), j.at("seasonal").get<std::vector<double>>()};
}

inline json to_json(const EtsFit& f) {
    return {{"schema_version", kSchemaVersion},
            {"model", "ets"},
            {"spec", f.spec.name()},
            {"label", f.spec.label()},
            {"period", f.spec.period},
            {"params", {{"alpha", f.params.alpha}, {"beta", f.params.beta}, {"gamma", f.params.gamma}, {"phi", f.params.phi}}},
            {"initial_state", to_json(f.initial_state)},
            {"final_state", to_json(f.final_state)},
            {"sse", number_or_null(f.sse)},
            {"sigma2", number_or_null(f.sigma2)},
            {"loglik", number_or_null(f.loglik)},
            {"aicc", number_or_null(f.aicc)},
            {"n", f.n},
            {"k", f.k},
            {"fitted", series_json(f.fitted)},
            {"residuals", series_json(f.residuals)}};
}

inline EtsFit ets_fit_from_json(const json& j) {
    EtsFit f;
    f.spec = EtsSpec::parse(j.at("spec").get<std::string>(), j.value("period", 12));
    const auto& p = j.at("params");
    f.params = {p.at("alpha").get<double>(), p.at("beta").get<double>(), p.at("gamma").get<double>(),
                p.at("phi").get<double>()};
    f.initial_state = ets_state_from_json(j.at("initial_state"));
    f.final_state = ets_state_from_json(j.at("final_state"));
    f.sse = number_from(j.at("sse"));
    f.sigma2 = number_from(j.at("sigma2"));
    f.loglik = number_from(j.at("loglik"));
    f.aicc = number_from(j.at("aicc"));
    f.n = j.at("n").get<std::size_t>();
    f.k = j.at("k").get<int>();
    f.fitted = series_from_json(j.at("fitted"));
    f.residuals = series_from_json(j.at("residuals"));
    return f;
}

inline json to_json(const ArimaFit& f) {
    const auto& s = f.spec;
    const auto& c = f.coefficients;
    return {{"schema_version", kSchemaVersion},
            {"model", "arima"},
            {"label", s.label()},
            {"order", {s.p, s.d, s.q}},
            {"seasonal", {s.P, s.D, s.Q, s.m}},
            {"include_constant", s.include_constant},
            {"coefficients",
             {{"phi", c.phi}, {"theta", c.theta}, {"seasonal_phi", c.seasonal_phi},
              {"seasonal_theta", c.seasonal_theta}, {"constant", c.constant}}},
            {"sigma2", number_or_null(f.sigma2)},
            {"css", number_or_null(f.css)},
            {"loglik", number_or_null(f.loglik)},
            {"aicc", number_or_null(f.aicc)},
            {"n_effective", f.n_effective},
            {"k", f.k},
            {"history", series_json(f.history)},
            {"residuals", series_json(f.residuals)},
            {"fitted", series_json(f.fitted)}};
}

/// Rebuilds a fit by re-running the residual recursion with the stored coefficients.
inline ArimaFit arima_fit_from_json(const json& j) {
    const auto o = j.at("order").get<std::vector<int>>();
    const auto s = j.at("seasonal").get<std::vector<int>>();
    const auto spec = ArimaSpec::make(o.at(0), o.at(1), o.at(2), s.at(0), s.at(1), s.at(2), s.at(3),
                                      j.at("include_constant").get<bool>());
    const auto& cj = j.at("coefficients");
    ArimaCoefficients c{cj.at("phi").get<std::vector<double>>(), cj.at("theta").get<std::vector<double>>(),
                        cj.at("seasonal_phi").get<std::vector<double>>(),
                        cj.at("seasonal_theta").get<std::vector<double>>(), cj.at("constant").get<double>()};
    return arima_with_coefficients(spec, std::move(c), series_from_json(j.at("history")));
}

inline json to_json(const ComparisonReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"label", e.label},
                           {"family", e.family},
                           {"differencing", {{"d", e.differencing.d}, {"D", e.differencing.D}, {"m", e.differencing.m}}},
                           {"k", e.k},
                           {"aicc", number_or_null(e.aicc)},
                           {"train", to_json(e.train)},
                           {"test", to_json(e.test)}});
    }
    return {{"schema_version", kSchemaVersion}, {"entries", entries}, {"winner_by", r.winner_by}};
}

inline json to_json(const StationTable& t) {
    json rows = json::object();
    for (std::size_t i = 0; i < t.stations.size(); ++i) {
        json row = json::object();
        for (std::size_t j = 0; j < t.variables.size(); ++j) row[std::string(info(t.variables[j]).tag)] = number_or_null(t.cells[i][j]);
        rows[t.stations[i]] = row;
    }
    return {{"schema_version", kSchemaVersion}, {"rows", rows}};
}

inline json error_json(std::string_view kind, const std::string& message) {
    return {{"schema_version", kSchemaVersion}, {"error", {{"kind", kind}, {"message", message}}}};
}

} // namespace airseries

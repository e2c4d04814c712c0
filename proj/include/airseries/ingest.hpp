#pragma once

#include <airseries/error.hpp>
#include <airseries/series.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace airseries {

enum class VariableKind {
    SO2,
    CO,
    O3,
    NO2,
    PM10,
    PM25,
    CAI,
    Temperature,
    Precipitation,
    WindSpeed,
    Pressure,
    Visibility,
};

inline constexpr std::size_t kVariableCount = 12;

inline constexpr std::array<VariableKind, kVariableCount> kAllVariables{
    VariableKind::SO2,         VariableKind::CO,           VariableKind::O3,        VariableKind::NO2,
    VariableKind::PM10,        VariableKind::PM25,         VariableKind::CAI,       VariableKind::Temperature,
    VariableKind::Precipitation, VariableKind::WindSpeed,  VariableKind::Pressure,  VariableKind::Visibility,
};

inline constexpr std::array<VariableKind, 5> kPollutantCovariates{
    VariableKind::SO2, VariableKind::CO, VariableKind::O3, VariableKind::NO2, VariableKind::PM10};

inline constexpr std::array<VariableKind, 5> kMeteorologicalCovariates{
    VariableKind::Temperature, VariableKind::Precipitation, VariableKind::WindSpeed, VariableKind::Pressure,
    VariableKind::Visibility};

struct VariableInfo {
    std::string_view tag;
    std::string_view column;
    std::string_view unit;
    bool nonnegative;
};

inline constexpr VariableInfo info(VariableKind kind) {
    switch (kind) {
    case VariableKind::SO2: return {"SO2", "SO2", "ppm", true};
    case VariableKind::CO: return {"CO", "CO", "ppm", true};
    case VariableKind::O3: return {"O3", "O3", "ppm", true};
    case VariableKind::NO2: return {"NO2", "NO2", "ppm", true};
    case VariableKind::PM10: return {"PM10", "PM10", "ug/m3", true};
    case VariableKind::PM25: return {"PM25", "PM25", "ug/m3", true};
    case VariableKind::CAI: return {"CAI", "CAI", "index", true};
    case VariableKind::Temperature: return {"TEMPERATURE", "TEMP", "degC", false};
    case VariableKind::Precipitation: return {"PRECIPITATION", "PRECIP", "mm", false};
    case VariableKind::WindSpeed: return {"WIND_SPEED", "WIND", "m/s", false};
    case VariableKind::Pressure: return {"PRESSURE", "PRESSURE", "hPa", false};
    case VariableKind::Visibility: return {"VISIBILITY", "VISIBILITY", "10m", false};
    }
    return {"?", "?", "?", false};
}

inline constexpr std::size_t slot(VariableKind kind) { return static_cast<std::size_t>(kind); }

/// Accepts either the tag (`WIND_SPEED`) or the CSV column name (`WIND`).
inline VariableKind parse_variable(std::string_view text) {
    for (auto kind : kAllVariables) {
        auto i = info(kind);
        if (text == i.tag || text == i.column) return kind;
    }
    if (text == "PM2.5") return VariableKind::PM25;
    fail(ErrorKind::Config, "unknown variable '" + std::string(text) + "'");
}

struct StationMeta {
    std::string name;
    std::string address;
    double longitude = 0.0;
    double latitude = 0.0;

    void validate() const {
        if (!(longitude >= -180.0 && longitude <= 180.0) || !(latitude >= -90.0 && latitude <= 90.0)) {
            fail(ErrorKind::Validity, "station '" + name + "' has out-of-range coordinates");
        }
    }
};

/// The four Seoul monitoring sites used for the PM2.5 study.
inline std::vector<StationMeta> seoul_reference_stations() {
    return {
        {"City-hall", "15, Deoksugung-gil, Jung-gu, Seoul, Republic of Korea", 126.9747, 37.5643},
        {"Ganseo-gu", "71, Gangseo-ro 45da-gil, Gangseo-gu, Seoul, Republic of Korea", 126.8351, 37.5447},
        {"Seocho-gu", "16, Sinbanpo-ro 15-gil, Seocho-gu, Seoul, Republic of Korea", 126.9945, 37.5046},
        {"Songpa-gu", "59, Gucheonmyeon-ro 42-gil, Gangdong-gu, Seoul, Republic of Korea", 127.1368, 37.545},
    };
}

/// Local civil date-hour.
struct HourStamp {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;

    auto operator<=>(const HourStamp&) const = default;

    MonthStamp month_stamp() const { return MonthStamp(year, month); }

    /// Parses `YYYY-MM-DD HH:MM` (a `T` separator is also accepted).
    static std::optional<HourStamp> parse(std::string_view text) {
        if (text.size() != 16 || text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') ||
            text[13] != ':') {
            return std::nullopt;
        }
        auto number = [&](std::size_t pos, std::size_t len, int& out) {
            auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
            return ec == std::errc{} && p == text.data() + pos + len;
        };
        HourStamp h;
        int minute = 0;
        if (!number(0, 4, h.year) || !number(5, 2, h.month) || !number(8, 2, h.day) || !number(11, 2, h.hour) ||
            !number(14, 2, minute)) {
            return std::nullopt;
        }
        const std::chrono::year_month_day ymd{std::chrono::year{h.year},
                                              std::chrono::month{static_cast<unsigned>(h.month)},
                                              std::chrono::day{static_cast<unsigned>(h.day)}};
        if (!ymd.ok() || h.hour < 0 || h.hour > 23 || minute < 0 || minute > 59) return std::nullopt;
        return h;
    }

    std::string to_string() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:00", year, month, day, hour);
        return buf;
    }
};

inline int hours_in_month(MonthStamp m) {
    using namespace std::chrono;
    year_month_day_last last{year{m.year()}, month_day_last{month{static_cast<unsigned>(m.month())}}};
    return static_cast<int>(static_cast<unsigned>(last.day())) * 24;
}

struct HourlyRecord {
    HourStamp timestamp;
    std::string station;
    std::array<std::optional<double>, kVariableCount> readings{};

    const std::optional<double>& reading(VariableKind kind) const { return readings[slot(kind)]; }
    std::optional<double>& reading(VariableKind kind) { return readings[slot(kind)]; }
};

/// Column mapping for the hourly CSV.
struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::string station_column = "station";
    std::vector<std::pair<std::string, VariableKind>> variable_columns;

    static CsvSchema standard() {
        CsvSchema s;
        for (auto kind : kAllVariables) s.variable_columns.emplace_back(std::string(info(kind).column), kind);
        return s;
    }
};

struct ParseReport {
    std::vector<HourlyRecord> records;
    std::vector<std::string> warnings;
    std::vector<std::string> diagnostics;
    std::size_t duplicates = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

} // namespace detail

/// Reads hourly station records. Unparseable numeric cells become missing
/// readings; rows with a bad timestamp are skipped with a diagnostic; repeated
/// (station, timestamp) rows keep the first occurrence. Output is ordered by
/// (station, timestamp).
inline ParseReport parse_hourly_csv(std::istream& in, const CsvSchema& schema = CsvSchema::standard()) {
    ParseReport report;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Schema, "input is empty; a header row is required");

    auto header = detail::split_csv_line(line);
    std::map<std::string, std::size_t, std::less<>> column_index;
    for (std::size_t i = 0; i < header.size(); ++i) column_index[std::string(detail::trim(header[i]))] = i;

    auto require = [&](const std::string& name) {
        auto it = column_index.find(name);
        if (it == column_index.end()) fail(ErrorKind::Schema, "missing mandatory column '" + name + "'");
        return it->second;
    };
    const std::size_t ts_col = require(schema.timestamp_column);
    const std::size_t st_col = require(schema.station_column);

    std::vector<std::pair<std::size_t, VariableKind>> mapped;
    for (const auto& [name, kind] : schema.variable_columns) {
        if (auto it = column_index.find(name); it != column_index.end()) mapped.emplace_back(it->second, kind);
    }
    if (mapped.empty()) fail(ErrorKind::Schema, "no variable columns matched the schema");

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() <= std::max(ts_col, st_col)) {
            report.diagnostics.push_back("row " + std::to_string(row) + ": too few fields");
            continue;
        }
        auto stamp = HourStamp::parse(detail::trim(fields[ts_col]));
        if (!stamp) {
            report.diagnostics.push_back("row " + std::to_string(row) + ": malformed timestamp '" +
                                         fields[ts_col] + "'");
            continue;
        }
        HourlyRecord rec;
        rec.timestamp = *stamp;
        rec.station = std::string(detail::trim(fields[st_col]));
        for (const auto& [col, kind] : mapped) {
            if (col >= fields.size()) continue;
            auto value = detail::parse_number(fields[col]);
            if (value && info(kind).nonnegative && *value < 0.0) {
                report.warnings.push_back("row " + std::to_string(row) + ": negative " +
                                          std::string(info(kind).tag) + " treated as missing");
                value.reset();
            }
            rec.reading(kind) = value;
        }
        report.records.push_back(std::move(rec));
    }

    auto key = [](const HourlyRecord& r) { return std::tie(r.station, r.timestamp); };
    std::stable_sort(report.records.begin(), report.records.end(),
                     [&](const HourlyRecord& a, const HourlyRecord& b) { return key(a) < key(b); });
    std::vector<HourlyRecord> unique;
    unique.reserve(report.records.size());
    for (auto& rec : report.records) {
        if (!unique.empty() && key(unique.back()) == key(rec)) {
            ++report.duplicates;
            report.warnings.push_back("duplicate record for " + rec.station + " at " + rec.timestamp.to_string() +
                                      "; keeping the first");
            continue;
        }
        unique.push_back(std::move(rec));
    }
    report.records = std::move(unique);
    return report;
}

inline std::vector<std::string> station_ids(std::span<const HourlyRecord> records) {
    std::vector<std::string> ids;
    for (const auto& r : records) {
        if (ids.empty() || ids.back() != r.station) {
            if (std::find(ids.begin(), ids.end(), r.station) == ids.end()) ids.push_back(r.station);
        }
    }
    return ids;
}

/// Monthly means from the first to the last month the station reports. A month
/// is missing unless at least `min_coverage` of its hours carry a reading.
inline TimeSeries monthly_mean(std::span<const HourlyRecord> records, std::string_view station,
                               VariableKind variable, double min_coverage = 0.5) {
    std::map<long, std::pair<double, int>> sums;
    std::optional<long> first, last;
    for (const auto& r : records) {
        if (r.station != station) continue;
        const long idx = r.timestamp.month_stamp().index();
        first = first ? std::min(*first, idx) : idx;
        last = last ? std::max(*last, idx) : idx;
        if (const auto& v = r.reading(variable)) {
            auto& [sum, count] = sums[idx];
            sum += *v;
            ++count;
        }
    }
    if (!first) fail(ErrorKind::EmptySelection, "no records for station '" + std::string(station) + "'");

    std::vector<std::optional<double>> values;
    for (long idx = *first; idx <= *last; ++idx) {
        auto it = sums.find(idx);
        if (it == sums.end() || it->second.second == 0) {
            values.emplace_back();
            continue;
        }
        const auto [sum, count] = it->second;
        const double needed = min_coverage * hours_in_month(MonthStamp::from_index(idx));
        if (static_cast<double>(count) >= needed) {
            values.emplace_back(sum / count);
        } else {
            values.emplace_back();
        }
    }
    return TimeSeries(MonthStamp::from_index(*first), std::move(values));
}

namespace detail {

inline double pearson_pairwise(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) pairs.emplace_back(*x[i], *y[i]);
    }
    if (pairs.size() < 3) fail(ErrorKind::InsufficientData, "correlation needs at least 3 paired values");
    double mx = 0.0, my = 0.0;
    for (auto [a, b] : pairs) {
        mx += a;
        my += b;
    }
    mx /= static_cast<double>(pairs.size());
    my /= static_cast<double>(pairs.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (auto [a, b] : pairs) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::UndefinedCorrelation, "correlation of a constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

} // namespace detail

/// Sample Pearson coefficient over pairwise-complete months.
inline double pearson_correlation(const TimeSeries& x, const TimeSeries& y) {
    if (x.start() != y.start() || x.size() != y.size()) {
        fail(ErrorKind::Misaligned, "correlation inputs must share a calendar span");
    }
    return detail::pearson_pairwise(x.values(), y.values());
}

/// Pearson coefficient on the hourly readings of one station.
inline double hourly_correlation(std::span<const HourlyRecord> records, std::string_view station, VariableKind x,
                                 VariableKind y) {
    std::vector<std::optional<double>> xs, ys;
    for (const auto& r : records) {
        if (r.station != station) continue;
        xs.push_back(r.reading(x));
        ys.push_back(r.reading(y));
    }
    if (xs.empty()) fail(ErrorKind::EmptySelection, "no records for station '" + std::string(station) + "'");
    return detail::pearson_pairwise(xs, ys);
}

/// Calendar-month means, January first. A month with no observations is missing.
inline std::array<std::optional<double>, 12> seasonal_profile(const TimeSeries& series) {
    if (series.size() < 12) fail(ErrorKind::InsufficientData, "seasonal profile needs at least 12 months");
    std::array<double, 12> sum{};
    std::array<int, 12> count{};
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!series[i]) continue;
        const auto k = static_cast<std::size_t>(series.month_at(i).month() - 1);
        sum[k] += *series[i];
        ++count[k];
    }
    std::array<std::optional<double>, 12> out;
    for (std::size_t k = 0; k < 12; ++k) {
        if (count[k] > 0) out[k] = sum[k] / count[k];
    }
    return out;
}

/// Station x variable grid of optional values (means or correlations).
struct StationTable {
    std::vector<std::string> stations;
    std::vector<VariableKind> variables;
    std::vector<std::vector<std::optional<double>>> cells; // [station][variable]

    const std::optional<double>& at(std::size_t station, std::size_t variable) const {
        return cells[station][variable];
    }
};

using CorrelationTable = StationTable;

/// Mean over all non-missing hourly readings per (station, variable).
inline StationTable descriptive_means(std::span<const HourlyRecord> records, std::span<const std::string> stations,
                                      std::span<const VariableKind> variables) {
    if (records.empty()) fail(ErrorKind::EmptySelection, "no records");
    StationTable table{{stations.begin(), stations.end()}, {variables.begin(), variables.end()}, {}};
    table.cells.assign(stations.size(), std::vector<std::optional<double>>(variables.size()));
    std::map<std::string, std::size_t, std::less<>> row_of;
    for (std::size_t i = 0; i < stations.size(); ++i) row_of[stations[i]] = i;
    std::vector<std::vector<std::pair<double, long>>> acc(stations.size(),
                                                          std::vector<std::pair<double, long>>(variables.size()));
    for (const auto& r : records) {
        auto it = row_of.find(r.station);
        if (it == row_of.end()) continue;
        for (std::size_t j = 0; j < variables.size(); ++j) {
            if (const auto& v = r.reading(variables[j])) {
                acc[it->second][j].first += *v;
                ++acc[it->second][j].second;
            }
        }
    }
    for (std::size_t i = 0; i < stations.size(); ++i) {
        for (std::size_t j = 0; j < variables.size(); ++j) {
            if (acc[i][j].second > 0) table.cells[i][j] = acc[i][j].first / static_cast<double>(acc[i][j].second);
        }
    }
    return table;
}

/// Correlation of `target` against each covariate, per station. Monthly means by
/// default, raw hourly readings when `hourly` is set. Cells that cannot be
/// computed (too few pairs, constant input) are left missing.
inline CorrelationTable correlation_table(std::span<const HourlyRecord> records, std::span<const std::string> stations,
                                          VariableKind target, std::span<const VariableKind> covariates,
                                          double min_coverage = 0.5, bool hourly = false) {
    CorrelationTable table{{stations.begin(), stations.end()}, {covariates.begin(), covariates.end()}, {}};
    table.cells.assign(stations.size(), std::vector<std::optional<double>>(covariates.size()));
    for (std::size_t i = 0; i < stations.size(); ++i) {
        std::optional<TimeSeries> base;
        if (!hourly) base = monthly_mean(records, stations[i], target, min_coverage);
        for (std::size_t j = 0; j < covariates.size(); ++j) {
            try {
                if (hourly) {
                    table.cells[i][j] = hourly_correlation(records, stations[i], target, covariates[j]);
                } else {
                    auto other = monthly_mean(records, stations[i], covariates[j], min_coverage);
                    table.cells[i][j] = pearson_correlation(*base, other);
                }
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::EmptySelection) throw;
            }
        }
    }
    return table;
}

} // namespace airseries

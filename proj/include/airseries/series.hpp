#pragma once

#include <airseries/error.hpp>

#include <charconv>
#include <compare>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace airseries {

/// A calendar month. Ordering is chronological.
class MonthStamp {
public:
    constexpr MonthStamp() = default;
    constexpr MonthStamp(int year, int month) : year_(year), month_(month) {
        if (month < 1 || month > 12) {
            throw Error(ErrorKind::Validity, "month must lie in 1..12");
        }
    }

    static constexpr MonthStamp from_index(long index) {
        long year = index >= 0 ? index / 12 : -((-index + 11) / 12);
        return MonthStamp(static_cast<int>(year), static_cast<int>(index - year * 12) + 1);
    }

    /// Months since year 0, January.
    constexpr long index() const { return static_cast<long>(year_) * 12 + (month_ - 1); }
    constexpr int year() const { return year_; }
    constexpr int month() const { return month_; }

    constexpr MonthStamp plus(long months) const { return from_index(index() + months); }

    constexpr auto operator<=>(const MonthStamp&) const = default;

    /// Parses `YYYY-MM`.
    static MonthStamp parse(std::string_view text) {
        auto dash = text.find('-');
        if (dash == std::string_view::npos || dash == 0 || text.size() - dash - 1 != 2) {
            throw Error(ErrorKind::Schema, "expected YYYY-MM, got '" + std::string(text) + "'");
        }
        int year = 0;
        int month = 0;
        auto [p1, e1] = std::from_chars(text.data(), text.data() + dash, year);
        auto [p2, e2] = std::from_chars(text.data() + dash + 1, text.data() + text.size(), month);
        if (e1 != std::errc{} || e2 != std::errc{} || p1 != text.data() + dash ||
            p2 != text.data() + text.size() || month < 1 || month > 12) {
            throw Error(ErrorKind::Schema, "expected YYYY-MM, got '" + std::string(text) + "'");
        }
        return MonthStamp(year, month);
    }

    std::string to_string() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d", year_, month_);
        return buf;
    }

private:
    int year_ = 1970;
    int month_ = 1;
};

inline long months_between(MonthStamp from, MonthStamp to) { return to.index() - from.index(); }

/// Monthly series with explicit missing slots. Index i is calendar month start + i.
class TimeSeries {
public:
    TimeSeries() = default;

    TimeSeries(MonthStamp start, std::vector<std::optional<double>> values, int period = 12)
        : start_(start), period_(period), values_(std::move(values)) {
        if (period < 1) {
            throw Error(ErrorKind::Validity, "period must be >= 1");
        }
    }

    static TimeSeries dense(MonthStamp start, std::span<const double> values, int period = 12) {
        return TimeSeries(start, std::vector<std::optional<double>>(values.begin(), values.end()), period);
    }
    static TimeSeries dense(MonthStamp start, const std::vector<double>& values, int period = 12) {
        return dense(start, std::span<const double>(values), period);
    }

    MonthStamp start() const { return start_; }
    int period() const { return period_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    /// Month of the final slot. Undefined for an empty series.
    MonthStamp last() const { return start_.plus(static_cast<long>(values_.size()) - 1); }
    /// Month one past the final slot.
    MonthStamp end() const { return start_.plus(static_cast<long>(values_.size())); }
    MonthStamp month_at(std::size_t i) const { return start_.plus(static_cast<long>(i)); }

    const std::vector<std::optional<double>>& values() const { return values_; }
    const std::optional<double>& operator[](std::size_t i) const { return values_[i]; }

    bool has_missing() const {
        for (const auto& v : values_) {
            if (!v) return true;
        }
        return false;
    }

    /// Values as plain doubles; throws MissingData if any slot is absent.
    std::vector<double> dense_values() const {
        std::vector<double> out;
        out.reserve(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!values_[i]) {
                fail(ErrorKind::MissingData, "missing value at " + month_at(i).to_string());
            }
            out.push_back(*values_[i]);
        }
        return out;
    }

    TimeSeries slice(std::size_t offset, std::size_t count) const {
        if (offset + count > values_.size()) {
            fail(ErrorKind::SplitBounds, "slice exceeds series length");
        }
        return TimeSeries(month_at(offset),
                          std::vector<std::optional<double>>(values_.begin() + static_cast<long>(offset),
                                                             values_.begin() + static_cast<long>(offset + count)),
                          period_);
    }

    /// Slot index of a month, if it falls inside the series.
    std::optional<std::size_t> index_of(MonthStamp m) const {
        long off = months_between(start_, m);
        if (off < 0 || off >= static_cast<long>(values_.size())) return std::nullopt;
        return static_cast<std::size_t>(off);
    }

    bool operator==(const TimeSeries&) const = default;

private:
    MonthStamp start_;
    int period_ = 12;
    std::vector<std::optional<double>> values_;
};

/// Joins two series; `tail` must begin the month after `head` ends.
inline TimeSeries concatenate(const TimeSeries& head, const TimeSeries& tail) {
    if (head.empty()) return tail;
    if (tail.empty()) return head;
    if (tail.start() != head.end()) {
        fail(ErrorKind::Misaligned, "series are not calendar-contiguous");
    }
    auto values = head.values();
    values.insert(values.end(), tail.values().begin(), tail.values().end());
    return TimeSeries(head.start(), std::move(values), head.period());
}

/// Ordinary order d, seasonal order D at lag m.
struct DifferenceSpec {
    int d = 0;
    int D = 0;
    int m = 12;

    int total_lag() const { return d + D * m; }
};

/// Coefficients c_0..c_K of (1 - B)^d (1 - B^m)^D, with c_0 = 1 and K = d + D*m.
inline std::vector<double> differencing_polynomial(const DifferenceSpec& spec) {
    std::vector<double> poly{1.0};
    auto multiply = [&poly](int lag) {
        std::vector<double> next(poly.size() + static_cast<std::size_t>(lag), 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + static_cast<std::size_t>(lag)] -= poly[i];
        }
        poly = std::move(next);
    };
    for (int i = 0; i < spec.D; ++i) multiply(spec.m);
    for (int i = 0; i < spec.d; ++i) multiply(1);
    return poly;
}

namespace detail {

inline std::vector<double> lag_difference(const std::vector<double>& x, std::size_t lag) {
    std::vector<double> out(x.size() - lag);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i + lag] - x[i];
    return out;
}

} // namespace detail

inline TimeSeries difference(const TimeSeries& series, int d) {
    if (d < 0) fail(ErrorKind::Validity, "difference order must be nonnegative");
    if (series.size() <= static_cast<std::size_t>(d)) {
        fail(ErrorKind::InsufficientData, "series length must exceed the differencing order");
    }
    auto x = series.dense_values();
    for (int i = 0; i < d; ++i) x = detail::lag_difference(x, 1);
    return TimeSeries::dense(series.start().plus(d), x, series.period());
}

inline TimeSeries seasonal_difference(const TimeSeries& series, int m, int D) {
    if (m < 1) fail(ErrorKind::Validity, "seasonal lag must be positive");
    if (D < 0) fail(ErrorKind::Validity, "seasonal order must be nonnegative");
    const long lag = static_cast<long>(m) * D;
    if (static_cast<long>(series.size()) <= lag) {
        fail(ErrorKind::InsufficientData, "series length must exceed D*m");
    }
    auto x = series.dense_values();
    for (int i = 0; i < D; ++i) x = detail::lag_difference(x, static_cast<std::size_t>(m));
    return TimeSeries::dense(series.start().plus(lag), x, series.period());
}

/// Seasonal differencing first, then ordinary.
inline TimeSeries apply_differences(const TimeSeries& series, const DifferenceSpec& spec) {
    if (static_cast<long>(series.size()) <= spec.total_lag()) {
        fail(ErrorKind::InsufficientData, "series too short for the requested differencing");
    }
    TimeSeries out = spec.D > 0 ? seasonal_difference(series, spec.m, spec.D) : series;
    return spec.d > 0 ? difference(out, spec.d) : out;
}

/// Inverse of apply_differences. `pivots` are the d + D*m values preceding the
/// first differenced entry; the result contains the pivots followed by the
/// reconstructed values.
inline TimeSeries integrate(const TimeSeries& diffed, const DifferenceSpec& spec, std::span<const double> pivots) {
    const auto lag = static_cast<std::size_t>(spec.total_lag());
    if (pivots.size() != lag) {
        fail(ErrorKind::Arity, "integrate expects " + std::to_string(lag) + " pivots, got " +
                                   std::to_string(pivots.size()));
    }
    const auto poly = differencing_polynomial(spec);
    const auto z = diffed.dense_values();
    // Extended precision: the recursion has unit roots, so rounding errors accumulate.
    std::vector<long double> s(pivots.begin(), pivots.end());
    s.reserve(lag + z.size());
    for (std::size_t t = 0; t < z.size(); ++t) {
        const std::size_t pos = lag + t;
        long double value = z[t];
        for (std::size_t j = 1; j <= lag; ++j) {
            if (poly[j] != 0.0) value -= static_cast<long double>(poly[j]) * s[pos - j];
        }
        s.push_back(value);
    }
    return TimeSeries::dense(diffed.start().plus(-static_cast<long>(lag)), std::vector<double>(s.begin(), s.end()),
                             diffed.period());
}

/// Splits into [start, cut) and [cut, end].
inline std::pair<TimeSeries, TimeSeries> split_at(const TimeSeries& series, MonthStamp cut) {
    if (series.empty() || cut <= series.start() || cut > series.last()) {
        fail(ErrorKind::SplitBounds, "cut " + cut.to_string() + " is not strictly inside the series span");
    }
    const auto n_head = static_cast<std::size_t>(months_between(series.start(), cut));
    return {series.slice(0, n_head), series.slice(n_head, series.size() - n_head)};
}

} // namespace airseries

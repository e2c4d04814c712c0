#pragma once

#include <airseries/criteria.hpp>
#include <airseries/error.hpp>
#include <airseries/forecast.hpp>
#include <airseries/optimizer.hpp>
#include <airseries/series.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace airseries {

enum class TrendKind { None, Additive, AdditiveDamped };
enum class SeasonalKind { None, Additive };

/// Additive-error ETS specification. Only additive components are supported.
struct EtsSpec {
    TrendKind trend = TrendKind::None;
    SeasonalKind seasonal = SeasonalKind::None;
    int period = 12;

    bool has_trend() const { return trend != TrendKind::None; }
    bool damped() const { return trend == TrendKind::AdditiveDamped; }
    bool has_seasonal() const { return seasonal == SeasonalKind::Additive; }

    void validate() const {
        if (has_seasonal() && period < 2) fail(ErrorKind::Validity, "seasonal ETS needs period >= 2");
    }

    /// Short name: ANN, AAN, AAdN, AAA, AAdA.
    std::string name() const {
        std::string s = "A";
        s += trend == TrendKind::None ? "N" : (trend == TrendKind::Additive ? "A" : "Ad");
        s += has_seasonal() ? "A" : "N";
        return s;
    }

    /// Label in the ETS(E,T,S) form.
    std::string label() const {
        std::string t = trend == TrendKind::None ? "N" : (trend == TrendKind::Additive ? "A" : "Ad");
        return "ETS(A," + t + "," + (has_seasonal() ? "A" : "N") + ")";
    }

    static EtsSpec parse(std::string_view text, int period = 12) {
        std::string s;
        for (char c : text) {
            if (c != ',' && c != ' ' && c != '(' && c != ')') s.push_back(c);
        }
        if (s.rfind("ETS", 0) == 0) s.erase(0, 3);
        EtsSpec spec;
        spec.period = period;
        if (s.size() < 3 || s[0] != 'A') {
            fail(ErrorKind::Config, "unsupported ETS spec '" + std::string(text) + "' (expected ANN, AAN, AAdN, AAA, AAdA)");
        }
        std::size_t pos = 1;
        if (s[pos] == 'N') {
            spec.trend = TrendKind::None;
            ++pos;
        } else if (s.compare(pos, 2, "Ad") == 0) {
            spec.trend = TrendKind::AdditiveDamped;
            pos += 2;
        } else if (s[pos] == 'A') {
            spec.trend = TrendKind::Additive;
            ++pos;
        } else {
            fail(ErrorKind::Config, "unsupported ETS trend in '" + std::string(text) + "'");
        }
        if (pos + 1 != s.size() || (s[pos] != 'N' && s[pos] != 'A')) {
            fail(ErrorKind::Config, "unsupported ETS seasonal in '" + std::string(text) + "'");
        }
        spec.seasonal = s[pos] == 'A' ? SeasonalKind::Additive : SeasonalKind::None;
        spec.validate();
        return spec;
    }

    bool operator==(const EtsSpec&) const = default;
};

/// ANN, AAN, AAdN, AAA, AAdA.
inline std::vector<EtsSpec> standard_ets_candidates(int period = 12) {
    std::vector<EtsSpec> out;
    for (auto name : {"ANN", "AAN", "AAdN", "AAA", "AAdA"}) out.push_back(EtsSpec::parse(name, period));
    return out;
}

struct EtsParams {
    double alpha = 0.5;
    double beta = 0.0;
    double gamma = 0.0;
    double phi = 1.0;
};

struct EtsBounds {
    static constexpr double lower = 1e-4;
    static constexpr double alpha_upper = 0.9999;
    static constexpr double phi_lower = 0.8;
    static constexpr double phi_upper = 0.98;
};

inline void validate_params(const EtsSpec& spec, const EtsParams& p) {
    auto bad = [](const std::string& what) { fail(ErrorKind::ParameterBounds, what + " outside its admissible range"); };
    if (!(p.alpha >= EtsBounds::lower && p.alpha <= EtsBounds::alpha_upper)) bad("alpha");
    if (spec.has_trend() && !(p.beta >= EtsBounds::lower && p.beta <= p.alpha)) bad("beta");
    if (spec.has_seasonal() && !(p.gamma >= EtsBounds::lower && p.gamma <= 1.0 - p.alpha + 1e-12)) bad("gamma");
    if (spec.damped() && !(p.phi >= EtsBounds::phi_lower && p.phi <= EtsBounds::phi_upper)) bad("phi");
}

/// Level, trend and the seasonal effects for the next m observations, in order.
struct EtsState {
    double level = 0.0;
    double trend = 0.0;
    std::vector<double> seasonal;
};

struct EtsFilterOutput {
    TimeSeries fitted;
    TimeSeries residuals;
    EtsState final_state;
};

namespace detail {

inline double effective_phi(const EtsSpec& spec, const EtsParams& p) {
    if (!spec.has_trend()) return 0.0;
    return spec.damped() ? p.phi : 1.0;
}

/// Innovations recursions on raw values. Writes one-step predictions and errors.
inline EtsState ets_recursion(const EtsSpec& spec, const EtsParams& p, const EtsState& init, std::span<const double> y,
                              std::span<double> fitted, std::span<double> errors) {
    const double phi = effective_phi(spec, p);
    const bool seasonal = spec.has_seasonal();
    const auto m = seasonal ? static_cast<std::size_t>(spec.period) : std::size_t{0};
    double level = init.level;
    double trend = spec.has_trend() ? init.trend : 0.0;
    std::vector<double> s = seasonal ? init.seasonal : std::vector<double>{};
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double season = seasonal ? s[t % m] : 0.0;
        const double damped_trend = phi * trend;
        const double yhat = level + damped_trend + season;
        const double e = y[t] - yhat;
        fitted[t] = yhat;
        errors[t] = e;
        level = level + damped_trend + p.alpha * e;
        if (spec.has_trend()) trend = damped_trend + p.beta * e;
        if (seasonal) s[t % m] = season + p.gamma * e;
    }
    EtsState final{level, trend, {}};
    if (seasonal) {
        final.seasonal.resize(m);
        for (std::size_t j = 0; j < m; ++j) final.seasonal[j] = s[(y.size() + j) % m];
    }
    return final;
}

inline double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double to_unit(double value, double lo, double hi) {
    if (hi - lo <= 0.0) return 0.0;
    const double p = std::clamp((value - lo) / (hi - lo), 1e-9, 1.0 - 1e-9);
    return logit(p);
}

} // namespace detail

/// Runs the additive innovations filter from `init` over `series`.
inline EtsFilterOutput ets_filter(const EtsSpec& spec, const EtsParams& params, const EtsState& init,
                                  const TimeSeries& series) {
    spec.validate();
    validate_params(spec, params);
    if (spec.has_seasonal() && init.seasonal.size() != static_cast<std::size_t>(spec.period)) {
        fail(ErrorKind::Arity, "initial seasonal state must have one entry per season");
    }
    const auto y = series.dense_values();
    std::vector<double> fitted(y.size()), errors(y.size());
    auto final = detail::ets_recursion(spec, params, init, y, fitted, errors);
    return {TimeSeries::dense(series.start(), fitted, series.period()),
            TimeSeries::dense(series.start(), errors, series.period()), std::move(final)};
}

/// Count of free smoothing parameters plus free initial-state values.
inline int ets_parameter_count(const EtsSpec& spec) {
    int k = 2; // alpha, l0
    if (spec.has_trend()) k += 2; // beta, b0
    if (spec.damped()) k += 1;    // phi
    if (spec.has_seasonal()) k += 1 + (spec.period - 1); // gamma, m-1 seasonal states
    return k;
}

struct EtsFit {
    EtsSpec spec;
    EtsParams params;
    EtsState initial_state;
    EtsState final_state;
    TimeSeries fitted;
    TimeSeries residuals;
    double sse = 0.0;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aicc = 0.0;
    std::size_t n = 0;
    int k = 0;
};

namespace detail {

/// Maps an unconstrained vector onto the admissible parameter box.
struct EtsParamMap {
    EtsSpec spec;

    std::size_t dims() const {
        return 1 + (spec.has_trend() ? 1 : 0) + (spec.has_seasonal() ? 1 : 0) + (spec.damped() ? 1 : 0);
    }

    EtsParams decode(const std::vector<double>& u) const {
        constexpr double lo = EtsBounds::lower;
        auto sig = [&](std::size_t i) { return sigmoid(std::clamp(u[i], -30.0, 30.0)); };
        EtsParams p;
        std::size_t i = 0;
        p.alpha = lo + (EtsBounds::alpha_upper - lo) * sig(i++);
        if (spec.has_trend()) p.beta = lo + (p.alpha - lo) * sig(i++);
        if (spec.has_seasonal()) p.gamma = lo + std::max(0.0, 1.0 - p.alpha - lo) * sig(i++);
        if (spec.damped()) p.phi = EtsBounds::phi_lower + (EtsBounds::phi_upper - EtsBounds::phi_lower) * sig(i++);
        if (!spec.has_trend()) p.beta = 0.0;
        if (!spec.has_seasonal()) p.gamma = 0.0;
        if (!spec.damped()) p.phi = 1.0;
        return p;
    }

    std::vector<double> encode(const EtsParams& p) const {
        constexpr double lo = EtsBounds::lower;
        std::vector<double> u;
        u.push_back(to_unit(p.alpha, lo, EtsBounds::alpha_upper));
        if (spec.has_trend()) u.push_back(to_unit(p.beta, lo, p.alpha));
        if (spec.has_seasonal()) u.push_back(to_unit(p.gamma, lo, 1.0 - p.alpha));
        if (spec.damped()) u.push_back(to_unit(p.phi, EtsBounds::phi_lower, EtsBounds::phi_upper));
        return u;
    }
};

/// Initial-state coordinates: l0, b0, then m-1 free seasonal values (the last is minus their sum).
inline std::size_t state_dims(const EtsSpec& spec) {
    return 1 + (spec.has_trend() ? 1 : 0) + (spec.has_seasonal() ? static_cast<std::size_t>(spec.period - 1) : 0);
}

inline EtsState state_from_coordinates(const EtsSpec& spec, std::span<const double> x) {
    EtsState s;
    std::size_t i = 0;
    s.level = x[i++];
    if (spec.has_trend()) s.trend = x[i++];
    if (spec.has_seasonal()) {
        const auto m = static_cast<std::size_t>(spec.period);
        s.seasonal.assign(m, 0.0);
        double total = 0.0;
        for (std::size_t j = 0; j + 1 < m; ++j) {
            s.seasonal[j] = x[i++];
            total += s.seasonal[j];
        }
        s.seasonal[m - 1] = -total;
    }
    return s;
}

/// The one-step errors are affine in the initial state, so for fixed smoothing
/// parameters the SSE-optimal initial state is a linear least-squares solution.
struct ProfiledState {
    EtsState state;
    double sse = 0.0;
};

inline ProfiledState profile_initial_state(const EtsSpec& spec, const EtsParams& p, std::span<const double> y) {
    const std::size_t n = y.size();
    const std::size_t k = state_dims(spec);
    std::vector<double> fitted(n), e0(n);
    std::vector<double> zero_coords(k, 0.0);
    detail::ets_recursion(spec, p, state_from_coordinates(spec, zero_coords), y, fitted, e0);

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    std::vector<double> zeros(n, 0.0), response(n);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> unit(k, 0.0);
        unit[j] = 1.0;
        detail::ets_recursion(spec, p, state_from_coordinates(spec, unit), zeros, fitted, response);
        for (std::size_t t = 0; t < n; ++t) {
            design(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = response[t];
        }
    }
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) rhs(static_cast<Eigen::Index>(t)) = -e0[t];
    Eigen::VectorXd x = design.colPivHouseholderQr().solve(rhs);

    std::vector<double> coords(x.data(), x.data() + x.size());
    ProfiledState out{state_from_coordinates(spec, coords), 0.0};
    std::vector<double> errors(n);
    detail::ets_recursion(spec, p, out.state, y, fitted, errors);
    for (double e : errors) out.sse += e * e;
    if (!std::isfinite(out.sse)) out.sse = std::numeric_limits<double>::infinity();
    return out;
}

} // namespace detail

/// Least-squares fit over smoothing parameters and initial state jointly.
/// Smoothing parameters are searched by Nelder-Mead in logit space; the
/// initial state is solved exactly for each candidate parameter vector.
inline EtsFit ets_fit(const EtsSpec& spec, const TimeSeries& series, const NelderMeadOptions& options = {}) {
    spec.validate();
    const auto y = series.dense_values();
    const std::size_t n = y.size();
    const std::size_t min_len = spec.has_seasonal() ? static_cast<std::size_t>(2 * spec.period + 4) : 8;
    if (n < min_len) {
        fail(ErrorKind::InsufficientData, spec.label() + " needs at least " + std::to_string(min_len) + " observations");
    }

    const detail::EtsParamMap map{spec};
    auto objective = [&](const std::vector<double>& u) {
        return detail::profile_initial_state(spec, map.decode(u), y).sse;
    };

    // Coarse grid to seed the simplex.
    EtsParams best_start;
    double best_value = std::numeric_limits<double>::infinity();
    for (double a : {0.05, 0.2, 0.5, 0.8}) {
        for (double bf : spec.has_trend() ? std::vector<double>{0.05, 0.3} : std::vector<double>{0.0}) {
            for (double gf : spec.has_seasonal() ? std::vector<double>{0.05, 0.3} : std::vector<double>{0.0}) {
                for (double ph : spec.damped() ? std::vector<double>{0.9} : std::vector<double>{1.0}) {
                    EtsParams p{a, std::max(EtsBounds::lower, bf * a), std::max(EtsBounds::lower, gf * (1.0 - a)), ph};
                    const double v = objective(map.encode(p));
                    if (v < best_value) {
                        best_value = v;
                        best_start = p;
                    }
                }
            }
        }
    }

    const auto result = nelder_mead(objective, map.encode(best_start), {}, options);

    EtsFit fit;
    fit.spec = spec;
    fit.params = map.decode(result.x);
    fit.initial_state = detail::profile_initial_state(spec, fit.params, y).state;
    auto filtered = ets_filter(spec, fit.params, fit.initial_state, series);
    fit.fitted = std::move(filtered.fitted);
    fit.residuals = std::move(filtered.residuals);
    fit.final_state = std::move(filtered.final_state);
    fit.sse = 0.0;
    for (const auto& e : fit.residuals.values()) fit.sse += *e * *e;
    fit.n = n;
    fit.k = ets_parameter_count(spec);
    fit.sigma2 = fit.sse / static_cast<double>(n);
    fit.loglik = profile_loglik(fit.sse, n);
    fit.aicc = aicc(fit.loglik, fit.k, n);
    return fit;
}

/// Point forecasts from a state by iterating the recursions with zero innovations.
inline std::vector<double> ets_point_forecast(const EtsSpec& spec, const EtsParams& params, const EtsState& state,
                                              int horizon) {
    if (horizon < 1) fail(ErrorKind::Validity, "forecast horizon must be >= 1");
    const double phi = detail::effective_phi(spec, params);
    double level = state.level;
    double trend = spec.has_trend() ? state.trend : 0.0;
    const auto m = spec.has_seasonal() ? state.seasonal.size() : std::size_t{0};
    std::vector<double> out(static_cast<std::size_t>(horizon));
    for (std::size_t h = 0; h < out.size(); ++h) {
        const double damped_trend = phi * trend;
        const double season = m > 0 ? state.seasonal[h % m] : 0.0;
        out[h] = level + damped_trend + season;
        level += damped_trend;
        trend = damped_trend;
    }
    return out;
}

/// Forecast-error variance multipliers 1 + sum_{j<h} c_j^2 for each horizon.
inline std::vector<double> ets_variance_multipliers(const EtsSpec& spec, const EtsParams& params, int horizon) {
    const double phi = detail::effective_phi(spec, params);
    std::vector<double> out(static_cast<std::size_t>(std::max(horizon, 0)));
    double acc = 1.0;
    double phi_sum = 0.0;
    double phi_pow = 1.0;
    for (int h = 1; h <= horizon; ++h) {
        out[static_cast<std::size_t>(h - 1)] = acc;
        const int j = h; // contribution for the next horizon
        phi_pow *= phi;
        phi_sum += phi_pow;
        double c = params.alpha;
        if (spec.has_trend()) c += params.beta * phi_sum;
        if (spec.has_seasonal() && j % spec.period == 0) c += params.gamma;
        acc += c * c;
    }
    return out;
}

inline Forecast ets_forecast(const EtsFit& fit, int horizon, double z = 1.96) {
    const auto point = ets_point_forecast(fit.spec, fit.params, fit.final_state, horizon);
    const auto mult = ets_variance_multipliers(fit.spec, fit.params, horizon);
    std::vector<double> lo(point.size()), hi(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double half = z * std::sqrt(fit.sigma2 * mult[i]);
        lo[i] = point[i] - half;
        hi[i] = point[i] + half;
    }
    const auto start = fit.fitted.end();
    const int period = fit.fitted.period();
    return {TimeSeries::dense(start, point, period), TimeSeries::dense(start, lo, period),
            TimeSeries::dense(start, hi, period)};
}

} // namespace airseries

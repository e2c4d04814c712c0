#pragma once

#include <airseries/criteria.hpp>
#include <airseries/error.hpp>
#include <airseries/forecast.hpp>
#include <airseries/optimizer.hpp>
#include <airseries/series.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace airseries {

/// Multiplicative seasonal ARIMA(p,d,q)(P,D,Q)_m.
struct ArimaSpec {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int m = 12;
    bool include_constant = true;

    static ArimaSpec make(int p, int d, int q, int P = 0, int D = 0, int Q = 0, int m = 12,
                          std::optional<bool> constant = std::nullopt) {
        ArimaSpec s{p, d, q, P, D, Q, m, constant.value_or(d + D == 0)};
        s.validate();
        return s;
    }

    void validate() const {
        if (p < 0 || d < 0 || q < 0 || P < 0 || D < 0 || Q < 0) {
            fail(ErrorKind::Validity, "ARIMA orders must be nonnegative");
        }
        if (m < 1) fail(ErrorKind::Validity, "seasonal period must be positive");
    }

    bool seasonal() const { return P + D + Q > 0; }
    DifferenceSpec differencing() const { return {d, D, m}; }
    int ar_order() const { return p + P * m; }
    int ma_order() const { return q + Q * m; }
    int coefficient_count() const { return p + q + P + Q; }
    /// Coefficients, constant, and innovation variance.
    int parameter_count() const { return coefficient_count() + (include_constant ? 1 : 0) + 1; }

    std::string label() const {
        std::string s = "ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
        if (seasonal()) {
            s += "(" + std::to_string(P) + "," + std::to_string(D) + "," + std::to_string(Q) + ")[" +
                 std::to_string(m) + "]";
        }
        return s;
    }

    bool operator==(const ArimaSpec&) const = default;
};

namespace detail {

inline std::vector<int> parse_int_list(std::string_view text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        auto field = text.substr(pos, comma - pos);
        int v = 0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || ptr != field.data() + field.size()) {
            fail(ErrorKind::Config, "expected a comma-separated integer list, got '" + std::string(text) + "'");
        }
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

} // namespace detail

/// Parses `p,d,q` with optional `P,D,Q,m` seasonal part.
inline ArimaSpec parse_arima_spec(std::string_view order, std::string_view seasonal = {},
                                  std::optional<bool> constant = std::nullopt) {
    auto o = detail::parse_int_list(order);
    if (o.size() != 3) fail(ErrorKind::Config, "order must be p,d,q");
    int P = 0, D = 0, Q = 0, m = 12;
    if (!seasonal.empty()) {
        auto s = detail::parse_int_list(seasonal);
        if (s.size() != 3 && s.size() != 4) fail(ErrorKind::Config, "seasonal order must be P,D,Q[,m]");
        P = s[0];
        D = s[1];
        Q = s[2];
        if (s.size() == 4) m = s[3];
    }
    return ArimaSpec::make(o[0], o[1], o[2], P, D, Q, m, constant);
}

/// Nonseasonal candidates (2,0,0) (3,0,0) (2,1,0) (2,2,0) (2,1,1) (2,1,2), then the
/// seasonal (0,0,0)(0,1,0)[12] and (0,0,0)(0,1,2)[12].
inline std::vector<ArimaSpec> standard_arima_candidates() {
    return {ArimaSpec::make(2, 0, 0), ArimaSpec::make(3, 0, 0),          ArimaSpec::make(2, 1, 0),
            ArimaSpec::make(2, 2, 0), ArimaSpec::make(2, 1, 1),          ArimaSpec::make(2, 1, 2),
            ArimaSpec::make(0, 0, 0, 0, 1, 0, 12), ArimaSpec::make(0, 0, 0, 0, 1, 2, 12)};
}

/// Coefficients in the sign convention
/// y'_t = c + sum phi_i y'_{t-i} + e_t + sum theta_j e_{t-j}, seasonal factors multiplying.
struct ArimaCoefficients {
    std::vector<double> phi;
    std::vector<double> theta;
    std::vector<double> seasonal_phi;
    std::vector<double> seasonal_theta;
    double constant = 0.0;
};

/// Minimum distance of polynomial roots from the unit circle.
inline constexpr double kRootMargin = 1e-3;

namespace detail {

/// Partial autocorrelations -> AR coefficients (1 - sum a_j z^j has roots outside the unit circle).
inline std::vector<double> partials_to_ar(std::span<const double> r) {
    std::vector<double> a, prev;
    for (std::size_t k = 0; k < r.size(); ++k) {
        a.assign(k + 1, 0.0);
        for (std::size_t j = 0; j < k; ++j) a[j] = prev[j] - r[k] * prev[k - 1 - j];
        a[k] = r[k];
        prev = a;
    }
    return a;
}

/// Inverse of partials_to_ar (Schur-Cohn step-down). Empty result if the polynomial is not stationary.
inline std::optional<std::vector<double>> ar_to_partials(std::span<const double> coeffs) {
    std::vector<double> a(coeffs.begin(), coeffs.end());
    std::vector<double> r(a.size());
    for (std::size_t k = a.size(); k-- > 0;) {
        const double rk = a[k];
        if (!(std::fabs(rk) < 1.0)) return std::nullopt;
        r[k] = rk;
        const double denom = 1.0 - rk * rk;
        std::vector<double> prev(k);
        for (std::size_t j = 0; j < k; ++j) prev[j] = (a[j] + rk * a[k - 1 - j]) / denom;
        a = std::move(prev);
    }
    return r;
}

/// Scale per unit of lag that moves every root outward by the margin.
inline double margin_scale(int lag_step) { return std::pow(1.0 + kRootMargin, -lag_step); }

/// Unconstrained u -> AR-sign coefficients with roots beyond 1 + margin (in B, for lag step `step`).
inline std::vector<double> decode_polynomial(std::span<const double> u, int step) {
    std::vector<double> r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = std::tanh(std::clamp(u[i], -20.0, 20.0));
    auto a = partials_to_ar(r);
    const double s = margin_scale(step);
    double f = 1.0;
    for (auto& v : a) {
        f *= s;
        v *= f;
    }
    return a;
}

inline std::optional<std::vector<double>> encode_polynomial(std::span<const double> a, int step) {
    std::vector<double> unscaled(a.begin(), a.end());
    const double s = margin_scale(step);
    double f = 1.0;
    for (auto& v : unscaled) {
        f *= s;
        v /= f;
    }
    auto r = ar_to_partials(unscaled);
    if (!r) return std::nullopt;
    std::vector<double> u(r->size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::fabs((*r)[i]) >= 1.0 - 1e-9) return std::nullopt;
        u[i] = std::atanh((*r)[i]);
    }
    return u;
}

/// Shrinks AR-sign coefficients geometrically until they are admissible.
inline std::vector<double> project_admissible(std::vector<double> a, int step) {
    for (int iter = 0; iter < 200 && !encode_polynomial(a, step); ++iter) {
        double f = 1.0;
        for (auto& v : a) {
            f *= 0.9;
            v *= f;
        }
    }
    if (!encode_polynomial(a, step)) std::fill(a.begin(), a.end(), 0.0);
    return a;
}

inline std::vector<double> negate(std::vector<double> v) {
    for (auto& x : v) x = -x;
    return v;
}

/// Lag weights a_j (j = 1..) of (1 - sum x_i B^i)(1 - sum X_i B^{im}) written as 1 - sum a_j B^j.
inline std::vector<double> expand_ar(std::span<const double> x, std::span<const double> seasonal, int m) {
    const std::size_t order = x.size() + seasonal.size() * static_cast<std::size_t>(m);
    std::vector<double> poly(order + 1, 0.0);
    std::vector<double> left(x.size() + 1, 0.0), right(seasonal.size() * static_cast<std::size_t>(m) + 1, 0.0);
    left[0] = 1.0;
    right[0] = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) left[i + 1] = -x[i];
    for (std::size_t i = 0; i < seasonal.size(); ++i) right[(i + 1) * static_cast<std::size_t>(m)] = -seasonal[i];
    for (std::size_t i = 0; i < left.size(); ++i) {
        for (std::size_t j = 0; j < right.size(); ++j) poly[i + j] += left[i] * right[j];
    }
    std::vector<double> a(order);
    for (std::size_t j = 1; j <= order; ++j) a[j - 1] = -poly[j];
    return a;
}

/// Lag weights b_j of (1 + sum x_i B^i)(1 + sum X_i B^{im}) written as 1 + sum b_j B^j.
inline std::vector<double> expand_ma(std::span<const double> x, std::span<const double> seasonal, int m) {
    auto nx = negate({x.begin(), x.end()});
    auto ns = negate({seasonal.begin(), seasonal.end()});
    return negate(expand_ar(nx, ns, m));
}

/// CSS innovations: e_t = 0 for t < ncond, otherwise the ARMA recursion residual.
inline void css_residuals(std::span<const double> w, std::span<const double> ar, std::span<const double> ma,
                          double constant, std::size_t ncond, std::span<double> e) {
    for (std::size_t t = 0; t < w.size(); ++t) {
        if (t < ncond) {
            e[t] = 0.0;
            continue;
        }
        double pred = constant;
        for (std::size_t j = 1; j <= ar.size() && j <= t; ++j) pred += ar[j - 1] * w[t - j];
        for (std::size_t j = 1; j <= ma.size() && j <= t; ++j) pred += ma[j - 1] * e[t - j];
        e[t] = w[t] - pred;
    }
}

struct CssEvaluation {
    double css = std::numeric_limits<double>::infinity();
    double constant = 0.0;
};

/// CSS with the constant (if any) concentrated out: residuals are affine in c.
inline CssEvaluation evaluate_css(std::span<const double> w, std::span<const double> ar, std::span<const double> ma,
                                  bool include_constant, std::size_t ncond) {
    std::vector<double> e0(w.size());
    css_residuals(w, ar, ma, 0.0, ncond, e0);
    CssEvaluation out;
    if (include_constant) {
        std::vector<double> zeros(w.size(), 0.0), g(w.size());
        css_residuals(zeros, ar, ma, -1.0, ncond, g); // e(c) = e(0) - c * g
        double num = 0.0, den = 0.0;
        for (std::size_t t = ncond; t < w.size(); ++t) {
            num += e0[t] * g[t];
            den += g[t] * g[t];
        }
        out.constant = den > 0.0 ? num / den : 0.0;
    }
    css_residuals(w, ar, ma, out.constant, ncond, e0);
    double css = 0.0;
    for (std::size_t t = ncond; t < w.size(); ++t) css += e0[t] * e0[t];
    out.css = std::isfinite(css) ? css : std::numeric_limits<double>::infinity();
    return out;
}

/// Ordinary least squares with intercept; nullopt when under-determined.
inline std::optional<Eigen::VectorXd> least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() < X.cols() + 2) return std::nullopt;
    auto qr = X.colPivHouseholderQr();
    if (qr.rank() < X.cols()) return std::nullopt;
    return Eigen::VectorXd(qr.solve(y));
}

inline double safe_mean(std::span<const double> w) {
    double s = 0.0;
    for (double v : w) s += v;
    return w.empty() ? 0.0 : s / static_cast<double>(w.size());
}

} // namespace detail

/// Hannan-Rissanen starting values: residuals of a long autoregression stand in
/// for the innovations, then w_t is regressed on its own lags and lagged residuals.
/// Falls back to pure autoregression, then to zeros, when data are too short.
inline ArimaCoefficients hannan_rissanen(const ArimaSpec& spec, std::span<const double> w) {
    const auto N = static_cast<long>(w.size());
    const auto m = static_cast<long>(spec.m);
    ArimaCoefficients c;
    c.phi.assign(static_cast<std::size_t>(spec.p), 0.0);
    c.theta.assign(static_cast<std::size_t>(spec.q), 0.0);
    c.seasonal_phi.assign(static_cast<std::size_t>(spec.P), 0.0);
    c.seasonal_theta.assign(static_cast<std::size_t>(spec.Q), 0.0);

    std::vector<long> ar_lags, ma_lags;
    for (long i = 1; i <= spec.p; ++i) ar_lags.push_back(i);
    for (long i = 1; i <= spec.P; ++i) ar_lags.push_back(i * m);
    for (long j = 1; j <= spec.q; ++j) ma_lags.push_back(j);
    for (long j = 1; j <= spec.Q; ++j) ma_lags.push_back(j * m);

    auto regress = [&](const std::vector<long>& wl, const std::vector<long>& el, const std::vector<double>& resid,
                       long first) -> std::optional<Eigen::VectorXd> {
        const long rows = N - first;
        const long cols = 1 + static_cast<long>(wl.size() + el.size());
        if (rows <= 0) return std::nullopt;
        Eigen::MatrixXd X(rows, cols);
        Eigen::VectorXd y(rows);
        for (long t = first; t < N; ++t) {
            const long r = t - first;
            y(r) = w[static_cast<std::size_t>(t)];
            X(r, 0) = 1.0;
            long col = 1;
            for (long l : wl) X(r, col++) = w[static_cast<std::size_t>(t - l)];
            for (long l : el) X(r, col++) = resid[static_cast<std::size_t>(t - l)];
        }
        return detail::least_squares(X, y);
    };

    const long max_ar = ar_lags.empty() ? 0 : ar_lags.back();
    const long max_ma = ma_lags.empty() ? 0 : ma_lags.back();
    std::optional<Eigen::VectorXd> beta;
    bool with_ma = false;
    if (!ma_lags.empty()) {
        const long long_order = std::min<long>(N / 3, std::max<long>(8, 2 * max_ma));
        std::vector<long> long_lags;
        for (long i = 1; i <= long_order; ++i) long_lags.push_back(i);
        if (auto stage1 = regress(long_lags, {}, {}, long_order)) {
            std::vector<double> resid(static_cast<std::size_t>(N), 0.0);
            for (long t = long_order; t < N; ++t) {
                double pred = (*stage1)(0);
                for (long i = 1; i <= long_order; ++i) pred += (*stage1)(i) * w[static_cast<std::size_t>(t - i)];
                resid[static_cast<std::size_t>(t)] = w[static_cast<std::size_t>(t)] - pred;
            }
            beta = regress(ar_lags, ma_lags, resid, long_order + std::max(max_ar, max_ma));
            with_ma = beta.has_value();
        }
    }
    if (!beta && !ar_lags.empty()) beta = regress(ar_lags, {}, {}, max_ar);

    if (beta) {
        long col = 1;
        for (int i = 0; i < spec.p; ++i) c.phi[static_cast<std::size_t>(i)] = (*beta)(col++);
        for (int i = 0; i < spec.P; ++i) c.seasonal_phi[static_cast<std::size_t>(i)] = (*beta)(col++);
        if (with_ma) {
            for (int j = 0; j < spec.q; ++j) c.theta[static_cast<std::size_t>(j)] = (*beta)(col++);
            for (int j = 0; j < spec.Q; ++j) c.seasonal_theta[static_cast<std::size_t>(j)] = (*beta)(col++);
        }
    }
    c.phi = detail::project_admissible(c.phi, 1);
    c.seasonal_phi = detail::project_admissible(c.seasonal_phi, spec.m);
    c.theta = detail::negate(detail::project_admissible(detail::negate(c.theta), 1));
    c.seasonal_theta = detail::negate(detail::project_admissible(detail::negate(c.seasonal_theta), spec.m));
    if (spec.include_constant) {
        double ar_sum = 0.0;
        for (double v : detail::expand_ar(c.phi, c.seasonal_phi, spec.m)) ar_sum += v;
        c.constant = detail::safe_mean(w) * (1.0 - ar_sum);
    }
    return c;
}

/// True when every AR and MA factor has its roots outside the unit circle.
inline bool is_stationary_invertible(const ArimaCoefficients& c) {
    return detail::ar_to_partials(c.phi) && detail::ar_to_partials(c.seasonal_phi) &&
           detail::ar_to_partials(detail::negate(c.theta)) && detail::ar_to_partials(detail::negate(c.seasonal_theta));
}

struct ArimaFit {
    ArimaSpec spec;
    ArimaCoefficients coefficients;
    double sigma2 = 0.0;
    double css = 0.0;
    double css_start = 0.0; ///< CSS at the Hannan-Rissanen starting point
    TimeSeries residuals;   ///< e_t for the conditioned span
    TimeSeries fitted;      ///< one-step predictions on the original scale, same calendar as residuals
    TimeSeries history;     ///< the series the model was fitted on
    double loglik = 0.0;
    double aicc = 0.0;
    std::size_t n_effective = 0;
    int k = 0;
};

namespace detail {

struct ArimaLayout {
    ArimaSpec spec;

    std::size_t dims() const { return static_cast<std::size_t>(spec.coefficient_count()); }

    ArimaCoefficients decode(const std::vector<double>& u) const {
        ArimaCoefficients c;
        auto take = [&](std::size_t offset, int count) {
            return std::span<const double>(u.data() + offset, static_cast<std::size_t>(count));
        };
        std::size_t off = 0;
        c.phi = decode_polynomial(take(off, spec.p), 1);
        off += static_cast<std::size_t>(spec.p);
        c.theta = negate(decode_polynomial(take(off, spec.q), 1));
        off += static_cast<std::size_t>(spec.q);
        c.seasonal_phi = decode_polynomial(take(off, spec.P), spec.m);
        off += static_cast<std::size_t>(spec.P);
        c.seasonal_theta = negate(decode_polynomial(take(off, spec.Q), spec.m));
        return c;
    }

    std::vector<double> encode(const ArimaCoefficients& c) const {
        std::vector<double> u;
        auto append = [&](const std::optional<std::vector<double>>& part, std::size_t count) {
            if (part) {
                u.insert(u.end(), part->begin(), part->end());
            } else {
                u.insert(u.end(), count, 0.0);
            }
        };
        append(encode_polynomial(c.phi, 1), c.phi.size());
        append(encode_polynomial(negate(c.theta), 1), c.theta.size());
        append(encode_polynomial(c.seasonal_phi, spec.m), c.seasonal_phi.size());
        append(encode_polynomial(negate(c.seasonal_theta), spec.m), c.seasonal_theta.size());
        return u;
    }
};

inline ArimaFit assemble_fit(const ArimaSpec& spec, ArimaCoefficients coeffs, const TimeSeries& series,
                             const TimeSeries& w_series) {
    const auto w = w_series.dense_values();
    const auto ncond = static_cast<std::size_t>(spec.ar_order());
    const auto ar = expand_ar(coeffs.phi, coeffs.seasonal_phi, spec.m);
    const auto ma = expand_ma(coeffs.theta, coeffs.seasonal_theta, spec.m);
    std::vector<double> e(w.size());
    css_residuals(w, ar, ma, coeffs.constant, ncond, e);

    ArimaFit fit;
    fit.spec = spec;
    fit.coefficients = std::move(coeffs);
    fit.history = series;
    fit.n_effective = w.size() - ncond;
    fit.css = 0.0;
    for (std::size_t t = ncond; t < w.size(); ++t) fit.css += e[t] * e[t];

    const auto y = series.dense_values();
    const std::size_t lag = static_cast<std::size_t>(spec.differencing().total_lag());
    std::vector<double> resid(e.begin() + static_cast<long>(ncond), e.end());
    std::vector<double> fitted(resid.size());
    for (std::size_t i = 0; i < resid.size(); ++i) fitted[i] = y[lag + ncond + i] - resid[i];
    const auto start = w_series.start().plus(static_cast<long>(ncond));
    fit.residuals = TimeSeries::dense(start, resid, series.period());
    fit.fitted = TimeSeries::dense(start, fitted, series.period());

    fit.sigma2 = fit.css / static_cast<double>(fit.n_effective);
    fit.loglik = profile_loglik(fit.css, fit.n_effective);
    fit.k = spec.parameter_count();
    fit.aicc = aicc(fit.loglik, fit.k, fit.n_effective);
    return fit;
}

inline TimeSeries differenced_for(const ArimaSpec& spec, const TimeSeries& series) {
    spec.validate();
    if (series.has_missing()) fail(ErrorKind::MissingData, "ARIMA fitting requires a series without missing values");
    const auto lag = spec.differencing().total_lag();
    if (static_cast<long>(series.size()) <= lag) {
        fail(ErrorKind::InsufficientData, spec.label() + ": series too short for its differencing");
    }
    return apply_differences(series, spec.differencing());
}

} // namespace detail

/// Conditional-sum-of-squares fit. Differencing is applied seasonal first, then
/// ordinary; coefficients start from Hannan-Rissanen and are optimized by
/// Nelder-Mead in the partial-autocorrelation parameterization, so every
/// returned polynomial is stationary/invertible with a root margin of 1e-3.
inline ArimaFit arima_fit(const ArimaSpec& spec, const TimeSeries& series, const NelderMeadOptions& options = {}) {
    const auto w_series = detail::differenced_for(spec, series);
    const auto w = w_series.dense_values();
    const auto need = static_cast<std::size_t>(3 * (spec.coefficient_count() + 1));
    const auto ncond = static_cast<std::size_t>(spec.ar_order());
    if (w.size() < need || w.size() <= ncond + 1) {
        fail(ErrorKind::InsufficientData, spec.label() + ": too few observations after differencing");
    }

    const detail::ArimaLayout layout{spec};
    auto objective = [&](const std::vector<double>& u) {
        const auto c = layout.decode(u);
        const auto ar = detail::expand_ar(c.phi, c.seasonal_phi, spec.m);
        const auto ma = detail::expand_ma(c.theta, c.seasonal_theta, spec.m);
        return detail::evaluate_css(w, ar, ma, spec.include_constant, ncond).css;
    };

    // Simplex searches from the Hannan-Rissanen point, from it with the MA part
    // zeroed, and from the origin; the best end point wins.
    const auto hr = hannan_rissanen(spec, w);
    const auto start = layout.encode(hr);
    const double css_start = objective(start);
    std::vector<std::vector<double>> starts{start};
    auto no_ma = hr;
    std::fill(no_ma.theta.begin(), no_ma.theta.end(), 0.0);
    std::fill(no_ma.seasonal_theta.begin(), no_ma.seasonal_theta.end(), 0.0);
    starts.push_back(layout.encode(no_ma));
    starts.push_back(std::vector<double>(layout.dims(), 0.0));
    std::vector<double> best_u = start;
    double best_css = css_start;
    for (const auto& s : starts) {
        const auto result = nelder_mead(objective, s, {}, options);
        if (result.value < best_css) {
            best_css = result.value;
            best_u = result.x;
        }
    }

    auto coeffs = layout.decode(best_u);
    const auto ar = detail::expand_ar(coeffs.phi, coeffs.seasonal_phi, spec.m);
    const auto ma = detail::expand_ma(coeffs.theta, coeffs.seasonal_theta, spec.m);
    coeffs.constant = detail::evaluate_css(w, ar, ma, spec.include_constant, ncond).constant;
    if (!is_stationary_invertible(coeffs)) {
        fail(ErrorKind::Validity, spec.label() + ": optimizer left the stationary/invertible region");
    }
    auto fit = detail::assemble_fit(spec, std::move(coeffs), series, w_series);
    fit.css_start = css_start;
    return fit;
}

/// Builds a fit from known coefficients (no optimization).
inline ArimaFit arima_with_coefficients(const ArimaSpec& spec, ArimaCoefficients coeffs, const TimeSeries& series) {
    if (coeffs.phi.size() != static_cast<std::size_t>(spec.p) || coeffs.theta.size() != static_cast<std::size_t>(spec.q) ||
        coeffs.seasonal_phi.size() != static_cast<std::size_t>(spec.P) ||
        coeffs.seasonal_theta.size() != static_cast<std::size_t>(spec.Q)) {
        fail(ErrorKind::Arity, spec.label() + ": coefficient counts do not match the orders");
    }
    const auto w_series = detail::differenced_for(spec, series);
    if (w_series.size() <= static_cast<std::size_t>(spec.ar_order()) + 1) {
        fail(ErrorKind::InsufficientData, spec.label() + ": too few observations after differencing");
    }
    auto fit = detail::assemble_fit(spec, std::move(coeffs), series, w_series);
    fit.css_start = fit.css;
    return fit;
}

/// psi-weights of the integrated model, for forecast-error variance.
inline std::vector<double> arima_psi_weights(const ArimaSpec& spec, const ArimaCoefficients& c, int count) {
    const auto ar = detail::expand_ar(c.phi, c.seasonal_phi, spec.m);
    const auto ma = detail::expand_ma(c.theta, c.seasonal_theta, spec.m);
    const auto delta = differencing_polynomial(spec.differencing());
    // Full AR operator: (1 - sum ar_j B^j) * delta(B).
    std::vector<double> ar_poly(ar.size() + 1, 0.0);
    ar_poly[0] = 1.0;
    for (std::size_t j = 0; j < ar.size(); ++j) ar_poly[j + 1] = -ar[j];
    std::vector<double> full(ar_poly.size() + delta.size() - 1, 0.0);
    for (std::size_t i = 0; i < ar_poly.size(); ++i) {
        for (std::size_t j = 0; j < delta.size(); ++j) full[i + j] += ar_poly[i] * delta[j];
    }
    std::vector<double> psi(static_cast<std::size_t>(std::max(count, 0)), 0.0);
    for (std::size_t j = 0; j < psi.size(); ++j) {
        double v = j == 0 ? 1.0 : (j <= ma.size() ? ma[j - 1] : 0.0);
        for (std::size_t i = 1; i <= j && i < full.size(); ++i) v -= full[i] * psi[j - i];
        psi[j] = v;
    }
    return psi;
}

/// Forecasts on the differenced scale, with future innovations set to zero.
inline std::vector<double> arima_differenced_forecast(const ArimaFit& fit, int horizon) {
    if (horizon < 1) fail(ErrorKind::Validity, "forecast horizon must be >= 1");
    const auto& spec = fit.spec;
    const auto w = apply_differences(fit.history, spec.differencing()).dense_values();
    const auto ar = detail::expand_ar(fit.coefficients.phi, fit.coefficients.seasonal_phi, spec.m);
    const auto ma = detail::expand_ma(fit.coefficients.theta, fit.coefficients.seasonal_theta, spec.m);
    std::vector<double> e(w.size());
    detail::css_residuals(w, ar, ma, fit.coefficients.constant, static_cast<std::size_t>(spec.ar_order()), e);

    std::vector<double> wx = w;
    e.resize(w.size() + static_cast<std::size_t>(horizon), 0.0);
    for (int h = 0; h < horizon; ++h) {
        const std::size_t t = w.size() + static_cast<std::size_t>(h);
        double v = fit.coefficients.constant;
        for (std::size_t j = 1; j <= ar.size() && j <= t; ++j) v += ar[j - 1] * wx[t - j];
        for (std::size_t j = 1; j <= ma.size() && j <= t; ++j) v += ma[j - 1] * e[t - j];
        wx.push_back(v);
    }
    return {wx.begin() + static_cast<long>(w.size()), wx.end()};
}

/// h-step forecasts on the original scale with Gaussian bands.
inline Forecast arima_forecast(const ArimaFit& fit, int horizon, double z = 1.96) {
    const auto diffs = arima_differenced_forecast(fit, horizon);
    const auto spec = fit.spec.differencing();
    const auto lag = static_cast<std::size_t>(spec.total_lag());
    const auto y = fit.history.dense_values();
    std::span<const double> pivots(y.data() + (y.size() - lag), lag);
    const auto start = fit.history.end();
    const int period = fit.history.period();
    const auto integrated = integrate(TimeSeries::dense(start, diffs, period), spec, pivots);
    const auto point = integrated.slice(lag, diffs.size());

    const auto psi = arima_psi_weights(fit.spec, fit.coefficients, horizon);
    std::vector<double> lo(diffs.size()), hi(diffs.size());
    double acc = 0.0;
    for (std::size_t h = 0; h < diffs.size(); ++h) {
        acc += psi[h] * psi[h];
        const double half = z * std::sqrt(fit.sigma2 * acc);
        lo[h] = *point[h] - half;
        hi[h] = *point[h] + half;
    }
    return {point, TimeSeries::dense(start, lo, period), TimeSeries::dense(start, hi, period)};
}

/// Draws a series from the model. Pre-sample values and innovations are zero;
/// a burn-in of 10 (p + q + P m + Q m + 1) draws is discarded before integrating.
inline TimeSeries simulate_arima(const ArimaSpec& spec, const ArimaCoefficients& coeffs, std::size_t n,
                                 double noise_sd, std::uint64_t seed, MonthStamp start = MonthStamp(2015, 1)) {
    spec.validate();
    if (n < 1) fail(ErrorKind::Validity, "simulation length must be >= 1");
    if (coeffs.phi.size() != static_cast<std::size_t>(spec.p) || coeffs.theta.size() != static_cast<std::size_t>(spec.q) ||
        coeffs.seasonal_phi.size() != static_cast<std::size_t>(spec.P) ||
        coeffs.seasonal_theta.size() != static_cast<std::size_t>(spec.Q)) {
        fail(ErrorKind::Arity, "coefficient counts do not match the orders");
    }
    if (!is_stationary_invertible(coeffs)) fail(ErrorKind::Validity, "coefficients are not stationary/invertible");

    const auto ar = detail::expand_ar(coeffs.phi, coeffs.seasonal_phi, spec.m);
    const auto ma = detail::expand_ma(coeffs.theta, coeffs.seasonal_theta, spec.m);
    const std::size_t burn = 10 * static_cast<std::size_t>(spec.p + spec.q + spec.P * spec.m + spec.Q * spec.m + 1);
    const std::size_t total = burn + n;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> w(total), e(total);
    for (std::size_t t = 0; t < total; ++t) {
        e[t] = noise_sd * normal(rng);
        double v = coeffs.constant + e[t];
        for (std::size_t j = 1; j <= ar.size() && j <= t; ++j) v += ar[j - 1] * w[t - j];
        for (std::size_t j = 1; j <= ma.size() && j <= t; ++j) v += ma[j - 1] * e[t - j];
        w[t] = v;
    }
    std::vector<double> kept(w.begin() + static_cast<long>(burn), w.end());
    const auto diff = spec.differencing();
    const auto lag = static_cast<std::size_t>(diff.total_lag());
    if (lag == 0) return TimeSeries::dense(start, kept);
    std::vector<double> pivots(lag, 0.0);
    const auto integrated = integrate(TimeSeries::dense(start.plus(static_cast<long>(lag)), kept), diff, pivots);
    return TimeSeries(start, std::vector<std::optional<double>>(integrated.values().begin() + static_cast<long>(lag),
                                                                integrated.values().end()));
}

/// One member of a fitted candidate suite; `fit` is empty when fitting failed.
struct ArimaSuiteEntry {
    ArimaSpec spec;
    std::optional<ArimaFit> fit;
    std::string error;
};

inline std::vector<ArimaSuiteEntry> fit_arima_suite(const TimeSeries& series, const std::vector<ArimaSpec>& specs,
                                                    const NelderMeadOptions& options = {}) {
    std::vector<ArimaSuiteEntry> out;
    for (const auto& spec : specs) {
        ArimaSuiteEntry entry{spec, std::nullopt, {}};
        try {
            entry.fit = arima_fit(spec, series, options);
        } catch (const std::exception& ex) {
            entry.error = ex.what();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

/// Index of the lowest-AICc successful entry; ties go to fewer parameters, then declaration order.
inline std::optional<std::size_t> select_by_aicc(const std::vector<ArimaSuiteEntry>& entries) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].fit) continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& a = *entries[i].fit;
        const auto& b = *entries[*best].fit;
        if (a.aicc < b.aicc || (a.aicc == b.aicc && a.k < b.k)) best = i;
    }
    return best;
}

} // namespace airseries

#pragma once

#include <airseries/error.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace airseries {

struct NelderMeadOptions {
    int max_evaluations = 2000;     // per run
    double diameter_tolerance = 1e-8;
    double value_tolerance = 1e-12; // relative spread of simplex values
    int restarts = 1;               // fresh simplex around the best point after convergence
    double initial_step = 0.25;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

inline NelderMeadResult nelder_mead_run(const std::function<double(const std::vector<double>&)>& f,
                                        const std::vector<double>& x0, const std::vector<double>& steps,
                                        const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    auto eval = [&f](const std::vector<double>& x) {
        double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += steps[i];
    std::vector<double> values(n + 1);
    int evals = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = eval(simplex[i]);
        ++evals;
    }

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> s(n + 1);
        std::vector<double> v(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            s[i] = simplex[order[i]];
            v[i] = values[order[i]];
        }
        simplex.swap(s);
        values.swap(v);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::fabs(simplex[i][j] - simplex[0][j]));
        }
        return d;
    };
    auto converged = [&] {
        if (diameter() < opt.diameter_tolerance) return true;
        const double spread = values[n] - values[0];
        return std::isfinite(values[n]) && spread <= opt.value_tolerance * (1.0 + std::fabs(values[0]));
    };

    // Standard coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    sort_simplex();
    while (!converged()) {
        if (evals >= opt.max_evaluations) {
            return {simplex[0], values[0], evals, false};
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
        }
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
            return p;
        };
        auto reflected = along(-1.0);
        const double fr = eval(reflected);
        ++evals;
        if (fr < values[0]) {
            auto expanded = along(-2.0);
            const double fe = eval(expanded);
            ++evals;
            if (fe < fr) {
                simplex[n] = std::move(expanded);
                values[n] = fe;
            } else {
                simplex[n] = std::move(reflected);
                values[n] = fr;
            }
        } else if (fr < values[n - 1]) {
            simplex[n] = std::move(reflected);
            values[n] = fr;
        } else {
            const bool outside = fr < values[n];
            auto contracted = along(outside ? -0.5 : 0.5);
            const double fc = eval(contracted);
            ++evals;
            if (fc < (outside ? fr : values[n])) {
                simplex[n] = std::move(contracted);
                values[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    }
                    values[i] = eval(simplex[i]);
                    ++evals;
                }
            }
        }
        sort_simplex();
    }
    return {simplex[0], values[0], evals, true};
}

} // namespace detail

/// Derivative-free minimization. Deterministic for a given objective and start.
/// Throws ConvergenceError carrying the best point if a run exhausts its budget.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, std::vector<double> steps = {},
                                    const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    if (n == 0) return {x0, f(x0), 1, true};
    if (steps.empty()) steps.assign(n, opt.initial_step);

    auto best = detail::nelder_mead_run(f, x0, steps, opt);
    int total = best.evaluations;
    for (int r = 0; r < opt.restarts && best.converged; ++r) {
        auto again = detail::nelder_mead_run(f, best.x, steps, opt);
        total += again.evaluations;
        if (!(again.value < best.value)) break;
        best = again;
    }
    best.evaluations = total;
    if (!best.converged) {
        throw ConvergenceError("Nelder-Mead exhausted its evaluation budget", best.x, best.value);
    }
    return best;
}

} // namespace airseries

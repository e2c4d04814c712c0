#pragma once

#include <airseries/arima.hpp>
#include <airseries/correlogram.hpp>
#include <airseries/decomposition.hpp>
#include <airseries/error.hpp>
#include <airseries/ets.hpp>
#include <airseries/evaluation.hpp>
#include <airseries/ingest.hpp>
#include <airseries/io.hpp>
#include <airseries/series.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace airseries {

/// Exit codes shared by the CLI.
enum class ExitCode : int { Ok = 0, Config = 2, Data = 3, AllCandidatesFailed = 4 };

inline ExitCode exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Validity: return ExitCode::Config;
    default: return ExitCode::Data;
    }
}

struct StudyConfig {
    std::string input_path;
    std::string station = "Ganseo-gu";
    VariableKind variable = VariableKind::PM25;
    MonthStamp train_end{2018, 12};
    int horizon = 12;
    std::vector<EtsSpec> ets_candidates = standard_ets_candidates();
    std::vector<ArimaSpec> arima_candidates = standard_arima_candidates();
    double min_coverage = 0.5;
    std::string output_dir = "study_out";
    bool force_aicc = false;
    int max_lag = 24;

    void validate() const {
        if (horizon < 1) fail(ErrorKind::Config, "horizon must be >= 1");
        if (ets_candidates.empty() && arima_candidates.empty()) fail(ErrorKind::Config, "no candidate models");
        if (input_path.empty()) fail(ErrorKind::Config, "input path is required");
        if (!(min_coverage >= 0.0 && min_coverage <= 1.0)) fail(ErrorKind::Config, "min_coverage must lie in [0, 1]");
        if (output_dir.empty()) fail(ErrorKind::Config, "output directory is required");
        if (max_lag < 1) fail(ErrorKind::Config, "max_lag must be >= 1");
    }
};

/// Semicolon-separated `p,d,q` or `p,d,q/P,D,Q,m` entries.
inline std::vector<ArimaSpec> parse_arima_list(std::string_view text) {
    std::vector<ArimaSpec> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find(';', pos);
        if (end == std::string_view::npos) end = text.size();
        auto item = detail::trim(text.substr(pos, end - pos));
        if (!item.empty()) {
            auto slash = item.find('/');
            out.push_back(slash == std::string_view::npos
                              ? parse_arima_spec(item)
                              : parse_arima_spec(item.substr(0, slash), item.substr(slash + 1)));
        }
        pos = end + 1;
    }
    return out;
}

inline std::vector<EtsSpec> parse_ets_list(std::string_view text) {
    std::vector<EtsSpec> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find_first_of(",;", pos);
        if (end == std::string_view::npos) end = text.size();
        auto item = detail::trim(text.substr(pos, end - pos));
        if (!item.empty()) out.push_back(EtsSpec::parse(item));
        pos = end + 1;
    }
    return out;
}

/// Applies one `key = value` setting. Unknown keys are config errors.
inline void apply_setting(StudyConfig& cfg, std::string_view key, std::string_view value) {
    auto number = [&](auto& out) {
        std::istringstream is{std::string(value)};
        if (!(is >> out) || !is.eof()) fail(ErrorKind::Config, "bad value for '" + std::string(key) + "'");
    };
    if (key == "input") {
        cfg.input_path = value;
    } else if (key == "station") {
        cfg.station = value;
    } else if (key == "variable") {
        cfg.variable = parse_variable(value);
    } else if (key == "train_end") {
        try {
            cfg.train_end = MonthStamp::parse(value);
        } catch (const Error&) {
            fail(ErrorKind::Config, "train_end must be YYYY-MM");
        }
    } else if (key == "horizon") {
        number(cfg.horizon);
    } else if (key == "ets") {
        cfg.ets_candidates = parse_ets_list(value);
    } else if (key == "arima") {
        cfg.arima_candidates = parse_arima_list(value);
    } else if (key == "min_coverage") {
        number(cfg.min_coverage);
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "force_aicc") {
        cfg.force_aicc = value == "true" || value == "1" || value == "yes";
    } else if (key == "max_lag") {
        number(cfg.max_lag);
    } else {
        fail(ErrorKind::Config, "unknown setting '" + std::string(key) + "'");
    }
}

/// Flat `key = value` lines; `#` starts a comment.
inline std::map<std::string, std::string> read_config_file(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto text = detail::trim(line);
        if (text.empty()) continue;
        auto eq = text.find('=');
        if (eq == std::string_view::npos) fail(ErrorKind::Config, "config line " + std::to_string(row) + " lacks '='");
        out[std::string(detail::trim(text.substr(0, eq)))] = std::string(detail::trim(text.substr(eq + 1)));
    }
    return out;
}

/// Loads either a `month,value` file or hourly records (aggregated for the configured station and variable).
inline TimeSeries load_study_series(const StudyConfig& cfg) {
    std::ifstream in(cfg.input_path);
    if (!in) fail(ErrorKind::Schema, "cannot open input '" + cfg.input_path + "'");
    std::string first;
    std::getline(in, first);
    in.clear();
    in.seekg(0);
    if (detail::trim(first).rfind("month", 0) == 0) return read_monthly_csv(in);
    const auto report = parse_hourly_csv(in);
    const auto ids = station_ids(report.records);
    if (std::find(ids.begin(), ids.end(), cfg.station) == ids.end()) {
        fail(ErrorKind::EmptySelection, "unknown station '" + cfg.station + "'");
    }
    return monthly_mean(report.records, cfg.station, cfg.variable, cfg.min_coverage);
}

inline std::string arima_slug(const ArimaSpec& s) {
    std::string out = "arima_" + std::to_string(s.p) + "_" + std::to_string(s.d) + "_" + std::to_string(s.q);
    if (s.seasonal()) {
        out += "_" + std::to_string(s.P) + "_" + std::to_string(s.D) + "_" + std::to_string(s.Q) + "_" + std::to_string(s.m);
    }
    if (s.include_constant != (s.d + s.D == 0)) out += s.include_constant ? "_c" : "_nc";
    return out;
}

/// Ljung-Box lags: min(2m, n/4), at least one more than the fitted parameters.
inline std::optional<WhiteNoiseTest> residual_check(const TimeSeries& residuals, int fitted_params, int period) {
    const int n = static_cast<int>(residuals.size());
    const int h = std::max(std::min(2 * period, n / 4), fitted_params + 1);
    if (h >= n) return std::nullopt;
    try {
        return ljung_box(residuals, h, fitted_params);
    } catch (const Error&) {
        return std::nullopt;
    }
}

struct StudyResult {
    ExitCode exit_code = ExitCode::Ok;
    json error;                       // populated when exit_code != Ok
    std::optional<ComparisonReport> report;
    std::vector<std::string> files;   // written, relative to output_dir
};

inline StudyResult run_study(const StudyConfig& cfg) {
    namespace fs = std::filesystem;
    StudyResult result;
    std::map<std::string, std::string> outputs; // filename -> content, written at the end

    auto failure = [&](ExitCode code, std::string_view kind, const std::string& message) {
        result.exit_code = code;
        result.error = error_json(kind, message);
        std::error_code ec;
        fs::create_directories(cfg.output_dir, ec);
        if (!ec) std::ofstream(fs::path(cfg.output_dir) / "error.json") << result.error.dump(2) << '\n';
        return result;
    };

    try {
        cfg.validate();
    } catch (const Error& e) {
        return failure(ExitCode::Config, to_string(e.kind()), e.what());
    }

    TimeSeries series, train, test;
    try {
        series = load_study_series(cfg);
        if (series.has_missing()) fail(ErrorKind::MissingData, "monthly series has missing months");
        std::tie(train, test) = split_at(series, cfg.train_end.plus(1));
    } catch (const Error& e) {
        return failure(exit_code_for(e.kind()), to_string(e.kind()), e.what());
    }
    const int horizon = cfg.horizon;
    const int period = series.period();

    auto csv = [](auto&& writer) {
        std::ostringstream os;
        writer(os);
        return os.str();
    };
    outputs["monthly_series.csv"] = csv([&](std::ostream& os) { write_monthly_csv(os, series); });

    // Diagnostics on the training period.
    try {
        const auto decomposition = classical_decompose(train, period);
        outputs["decomposition.csv"] = csv([&](std::ostream& os) { write_decomposition_csv(os, decomposition); });
        const auto lag_raw = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_lag), train.size() - 1);
        outputs["acf_raw.csv"] = csv([&](std::ostream& os) { write_correlogram_csv(os, acf(train, lag_raw)); });
        outputs["pacf_raw.csv"] = csv([&](std::ostream& os) { write_correlogram_csv(os, pacf(train, lag_raw)); });
        const auto diffed = seasonal_difference(train, period, 1);
        const auto lag_diff = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_lag), diffed.size() - 1);
        outputs["acf_diff.csv"] = csv([&](std::ostream& os) { write_correlogram_csv(os, acf(diffed, lag_diff)); });
        outputs["pacf_diff.csv"] = csv([&](std::ostream& os) { write_correlogram_csv(os, pacf(diffed, lag_diff)); });
    } catch (const Error& e) {
        return failure(exit_code_for(e.kind()), to_string(e.kind()), std::string("diagnostics: ") + e.what());
    }

    std::vector<ComparisonEntry> entries;
    json candidates = json::array();
    json white_noise = json::object();
    int ets_ok = 0, arima_ok = 0;

    auto record = [&](const std::string& label, const std::string& family, const std::string& slug,
                      const HoldoutResult& h, json fit_json, const TimeSeries& residuals, int fitted_params,
                      double aicc_value, int k, DifferenceSpec diff, const Forecast& forecast) {
        fit_json["holdout"] = {{"train", to_json(h.train)}, {"test", to_json(h.test)}};
        outputs["fit_" + slug + ".json"] = fit_json.dump(2) + "\n";
        outputs["forecast_" + slug + ".csv"] = csv([&](std::ostream& os) { write_forecast_csv(os, forecast); });
        if (auto lb = residual_check(residuals, fitted_params, period)) {
            white_noise[label] = to_json(*lb);
        } else {
            white_noise[label] = nullptr;
        }
        entries.push_back({label, family, diff, k, std::isfinite(aicc_value) ? std::optional<double>(aicc_value) : std::nullopt,
                           h.train, h.test});
        candidates.push_back({{"label", label}, {"family", family}, {"status", "ok"}});
    };

    for (const auto& spec : cfg.ets_candidates) {
        std::optional<EtsFit> fit;
        try {
            auto h = holdout_evaluate(
                [&](const TimeSeries& tr, int hz) {
                    fit = ets_fit(spec, tr);
                    return ModelRun{fit->fitted, ets_forecast(*fit, hz).point};
                },
                series, cfg.train_end.plus(1), horizon);
            int smoothing = 1 + (spec.has_trend() ? 1 : 0) + (spec.has_seasonal() ? 1 : 0) + (spec.damped() ? 1 : 0);
            record(spec.label(), "ETS", "ets_" + spec.name(), h, to_json(*fit), fit->residuals, smoothing, fit->aicc,
                   fit->k, DifferenceSpec{0, 0, period}, ets_forecast(*fit, horizon));
            ++ets_ok;
        } catch (const std::exception& e) {
            candidates.push_back({{"label", spec.label()}, {"family", "ETS"}, {"status", "failed"}, {"error", e.what()}});
        }
    }
    for (const auto& spec : cfg.arima_candidates) {
        std::optional<ArimaFit> fit;
        try {
            auto h = holdout_evaluate(
                [&](const TimeSeries& tr, int hz) {
                    fit = arima_fit(spec, tr);
                    return ModelRun{fit->fitted, arima_forecast(*fit, hz).point};
                },
                series, cfg.train_end.plus(1), horizon);
            record(spec.label(), "ARIMA", arima_slug(spec), h, to_json(*fit), fit->residuals, spec.coefficient_count(),
                   fit->aicc, fit->k, spec.differencing(), arima_forecast(*fit, horizon));
            ++arima_ok;
        } catch (const std::exception& e) {
            candidates.push_back({{"label", spec.label()}, {"family", "ARIMA"}, {"status", "failed"}, {"error", e.what()}});
        }
    }

    const bool ets_failed = !cfg.ets_candidates.empty() && ets_ok == 0;
    const bool arima_failed = !cfg.arima_candidates.empty() && arima_ok == 0;
    json study = {{"schema_version", kSchemaVersion},
                  {"station", cfg.station},
                  {"variable", std::string(info(cfg.variable).tag)},
                  {"series_start", series.start().to_string()},
                  {"series_end", series.last().to_string()},
                  {"train_end", cfg.train_end.to_string()},
                  {"horizon", horizon},
                  {"candidates", candidates}};
    outputs["study.json"] = study.dump(2) + "\n";
    outputs["ljung_box.json"] = json{{"schema_version", kSchemaVersion}, {"models", white_noise}}.dump(2) + "\n";

    if (!entries.empty()) {
        auto report = compare_models(entries, {cfg.force_aicc});
        outputs["comparison.json"] = to_json(report).dump(2) + "\n";
        outputs["comparison.txt"] = format_comparison_table(report);
        result.report = std::move(report);
    }

    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) return failure(ExitCode::Config, "config", "cannot create output directory '" + cfg.output_dir + "'");
    for (const auto& [name, content] : outputs) {
        std::ofstream out(fs::path(cfg.output_dir) / name, std::ios::binary);
        out << content;
        result.files.push_back(name);
    }

    if (ets_failed || arima_failed) {
        result.exit_code = ExitCode::AllCandidatesFailed;
        result.error = error_json("all-candidates-failed",
                                  std::string("every ") + (ets_failed ? "ETS" : "ARIMA") + " candidate failed to fit");
        std::ofstream(fs::path(cfg.output_dir) / "error.json") << result.error.dump(2) << '\n';
    }
    return result;
}

} // namespace airseries

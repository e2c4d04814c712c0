// airseries command-line front end.
#include <airseries.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace airseries;

namespace {

struct SeriesSource {
    std::string series_path;
    std::string input_path;
    std::string station;
    std::string variable = "PM25";
    double min_coverage = 0.5;

    void attach(CLI::App* cmd) {
        cmd->add_option("--series", series_path, "Monthly CSV with columns month,value");
        cmd->add_option("--input", input_path, "Hourly CSV in the standard schema");
        cmd->add_option("--station", station, "Station id (hourly input)");
        cmd->add_option("--variable", variable, "Variable tag (hourly input)");
        cmd->add_option("--min-coverage", min_coverage, "Minimum hourly coverage per month")->check(CLI::Range(0.0, 1.0));
    }

    TimeSeries load() const {
        if (series_path.empty() == input_path.empty()) {
            fail(ErrorKind::Config, "give exactly one of --series or --input");
        }
        if (!series_path.empty()) {
            std::ifstream in(series_path);
            if (!in) fail(ErrorKind::Schema, "cannot open '" + series_path + "'");
            return read_monthly_csv(in);
        }
        if (station.empty()) fail(ErrorKind::Config, "--station is required with --input");
        std::ifstream in(input_path);
        if (!in) fail(ErrorKind::Schema, "cannot open '" + input_path + "'");
        const auto report = parse_hourly_csv(in);
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
        return monthly_mean(report.records, station, parse_variable(variable), min_coverage);
    }
};

/// Writes to the named file, or standard output when the name is empty or "-".
template <typename Writer>
void emit(const std::string& path, Writer&& writer) {
    if (path.empty() || path == "-") {
        writer(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Config, "cannot write '" + path + "'");
    writer(out);
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Schema, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, "'" + path + "' is not valid JSON: " + e.what());
    }
}

std::optional<MonthStamp> parse_cut(const std::string& train_end) {
    if (train_end.empty()) return std::nullopt;
    return MonthStamp::parse(train_end).plus(1);
}

/// Splits at the cut when given; the training part is fitted, the rest is held out.
std::pair<TimeSeries, std::optional<TimeSeries>> training_part(const TimeSeries& series, const std::string& train_end) {
    auto cut = parse_cut(train_end);
    if (!cut) return {series, std::nullopt};
    auto [train, test] = split_at(series, *cut);
    return {train, test};
}

json holdout_json(const TimeSeries& train, const TimeSeries& fitted, const TimeSeries& test, const Forecast& forecast) {
    const auto offset = *train.index_of(fitted.start());
    const auto n = std::min(test.size(), forecast.point.size());
    return {{"train", to_json(compute_metrics(train.slice(offset, fitted.size()), fitted))},
            {"test", to_json(compute_metrics(test.slice(0, n), forecast.point.slice(0, n)))}};
}

int fail_with(ExitCode code, std::string_view kind, const std::string& message) {
    std::cerr << "error: " << message << '\n';
    std::cout << error_json(kind, message).dump() << '\n';
    return static_cast<int>(code);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monthly air-quality series analysis and forecasting"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Aggregate hourly records into a monthly series and station tables");
    std::string ingest_input, ingest_station, ingest_variable = "PM25", ingest_output, means_out, corr_out;
    double ingest_coverage = 0.5;
    bool hourly_corr = false;
    ingest->add_option("--input", ingest_input, "Hourly CSV")->required();
    ingest->add_option("--station", ingest_station, "Station for the monthly series");
    ingest->add_option("--variable", ingest_variable, "Variable for the monthly series");
    ingest->add_option("--min-coverage", ingest_coverage, "Minimum hourly coverage per month")->check(CLI::Range(0.0, 1.0));
    ingest->add_option("--output", ingest_output, "Monthly series CSV (default stdout)");
    ingest->add_option("--means", means_out, "Per-station variable means (.csv or .json)");
    ingest->add_option("--correlations", corr_out, "Per-station correlations with the variable (.csv or .json)");
    ingest->add_flag("--hourly", hourly_corr, "Correlate hourly readings instead of monthly means");

    // decompose / acf / pacf / ljung-box
    SeriesSource decompose_src, acf_src, pacf_src, lb_src;
    std::string decompose_out, acf_out, pacf_out;
    int acf_lag = 24, pacf_lag = 24, lb_lags = 24, lb_fitted = 0;
    bool acf_sdiff = false, pacf_sdiff = false;
    auto* decompose = app.add_subcommand("decompose", "Classical additive decomposition");
    decompose_src.attach(decompose);
    decompose->add_option("--output", decompose_out, "CSV path (default stdout)");
    auto* acf_cmd = app.add_subcommand("acf", "Sample autocorrelation");
    acf_src.attach(acf_cmd);
    acf_cmd->add_option("--max-lag", acf_lag)->check(CLI::PositiveNumber);
    acf_cmd->add_flag("--seasonal-diff", acf_sdiff, "Apply one lag-12 difference first");
    acf_cmd->add_option("--output", acf_out);
    auto* pacf_cmd = app.add_subcommand("pacf", "Sample partial autocorrelation");
    pacf_src.attach(pacf_cmd);
    pacf_cmd->add_option("--max-lag", pacf_lag)->check(CLI::PositiveNumber);
    pacf_cmd->add_flag("--seasonal-diff", pacf_sdiff, "Apply one lag-12 difference first");
    pacf_cmd->add_option("--output", pacf_out);
    auto* lb_cmd = app.add_subcommand("ljung-box", "Ljung-Box portmanteau test");
    lb_src.attach(lb_cmd);
    lb_cmd->add_option("--lags", lb_lags)->check(CLI::PositiveNumber);
    lb_cmd->add_option("--fitted-params", lb_fitted)->check(CLI::NonNegativeNumber);

    // fit-ets / fit-arima
    SeriesSource ets_src, arima_src;
    std::string ets_spec = "AAdA", ets_train_end, ets_out;
    auto* fit_ets = app.add_subcommand("fit-ets", "Fit one ETS model");
    ets_src.attach(fit_ets);
    fit_ets->add_option("--spec", ets_spec, "ANN, AAN, AAdN, AAA or AAdA");
    fit_ets->add_option("--train-end", ets_train_end, "Last training month (YYYY-MM); later months are held out");
    fit_ets->add_option("--output", ets_out, "Fit JSON path (default stdout)");

    std::string arima_order, arima_seasonal, arima_train_end, arima_out;
    bool no_constant = false, with_constant = false;
    auto* fit_arima = app.add_subcommand("fit-arima", "Fit one ARIMA model by conditional sum of squares");
    arima_src.attach(fit_arima);
    fit_arima->add_option("--order", arima_order, "p,d,q")->required();
    fit_arima->add_option("--seasonal", arima_seasonal, "P,D,Q,m");
    fit_arima->add_flag("--no-constant", no_constant);
    fit_arima->add_flag("--constant", with_constant);
    fit_arima->add_option("--train-end", arima_train_end, "Last training month (YYYY-MM)");
    fit_arima->add_option("--output", arima_out, "Fit JSON path (default stdout)");

    // forecast
    std::string fc_fit, fc_out;
    int fc_horizon = 12;
    double fc_z = 1.96;
    auto* forecast = app.add_subcommand("forecast", "Forecast from a saved fit");
    forecast->add_option("--fit", fc_fit, "Fit JSON from fit-ets or fit-arima")->required();
    forecast->add_option("--horizon", fc_horizon)->check(CLI::PositiveNumber);
    forecast->add_option("--z", fc_z, "Interval half-width in standard deviations")->check(CLI::PositiveNumber);
    forecast->add_option("--output", fc_out, "CSV path (default stdout)");

    // compare
    std::vector<std::string> cmp_fits;
    SeriesSource cmp_src;
    std::string cmp_ets, cmp_arima, cmp_train_end, cmp_json;
    bool force_aicc = false;
    auto* compare = app.add_subcommand("compare", "Holdout comparison table");
    compare->add_option("--fit", cmp_fits, "Fit JSONs carrying holdout metrics");
    cmp_src.attach(compare);
    compare->add_option("--ets", cmp_ets, "ETS specs to fit, e.g. AAdA,AAA");
    compare->add_option("--arima", cmp_arima, "ARIMA orders, e.g. '2,1,1;0,0,0/0,1,0,12'");
    compare->add_option("--train-end", cmp_train_end, "Last training month (YYYY-MM)");
    compare->add_option("--json", cmp_json, "Also write the report as JSON");
    compare->add_flag("--force-aicc", force_aicc, "Rank AICc across families and differencing orders");

    // study
    std::string study_config;
    std::vector<std::string> study_sets;
    std::string st_input, st_station, st_variable, st_train_end, st_ets, st_arima, st_output;
    std::optional<int> st_horizon;
    std::optional<double> st_coverage;
    bool st_force = false;
    auto* study = app.add_subcommand("study", "Run the full pipeline and write every artifact");
    study->add_option("--config", study_config, "key = value config file");
    study->add_option("--input", st_input);
    study->add_option("--station", st_station);
    study->add_option("--variable", st_variable);
    study->add_option("--train-end", st_train_end);
    study->add_option("--horizon", st_horizon);
    study->add_option("--ets", st_ets);
    study->add_option("--arima", st_arima);
    study->add_option("--min-coverage", st_coverage);
    study->add_option("--output-dir", st_output);
    study->add_flag("--force-aicc", st_force);
    study->add_option("--set", study_sets, "Extra key=value overrides");

    // synth
    std::string synth_hourly, synth_monthly;
    std::vector<std::string> synth_stations{"Ganseo-gu", "Jongno-gu", "Songpa-gu"};
    std::uint64_t synth_seed = 1;
    std::size_t synth_months = 60;
    auto* synth = app.add_subcommand("synth", "Write synthetic fixture data");
    synth->add_option("--hourly", synth_hourly, "Hourly CSV path");
    synth->add_option("--monthly", synth_monthly, "Monthly CSV path");
    synth->add_option("--seed", synth_seed);
    synth->add_option("--months", synth_months)->check(CLI::PositiveNumber);
    synth->add_option("--stations", synth_stations);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::Config);
    }

    try {
        if (*ingest) {
            std::ifstream in(ingest_input);
            if (!in) fail(ErrorKind::Schema, "cannot open '" + ingest_input + "'");
            const auto report = parse_hourly_csv(in);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
            for (const auto& d : report.diagnostics) std::cerr << "skipped: " << d << '\n';
            const auto stations = station_ids(report.records);
            const auto target = parse_variable(ingest_variable);
            if (!ingest_station.empty()) {
                const auto series = monthly_mean(report.records, ingest_station, target, ingest_coverage);
                emit(ingest_output, [&](std::ostream& os) { write_monthly_csv(os, series); });
            }
            auto table_out = [](const std::string& path, const StationTable& t) {
                emit(path, [&](std::ostream& os) {
                    if (ends_with(path, ".json")) {
                        os << to_json(t).dump(2) << '\n';
                    } else {
                        write_station_table_csv(os, t);
                    }
                });
            };
            if (!means_out.empty()) {
                table_out(means_out, descriptive_means(report.records, stations, kAllVariables));
            }
            if (!corr_out.empty()) {
                std::vector<VariableKind> covariates;
                for (auto v : kAllVariables) {
                    if (v != target) covariates.push_back(v);
                }
                table_out(corr_out, correlation_table(report.records, stations, target, covariates, ingest_coverage,
                                                      hourly_corr));
            }
            if (ingest_station.empty() && means_out.empty() && corr_out.empty()) {
                fail(ErrorKind::Config, "nothing to do: give --station, --means or --correlations");
            }
        } else if (*decompose) {
            const auto d = classical_decompose(decompose_src.load(), 12);
            emit(decompose_out, [&](std::ostream& os) { write_decomposition_csv(os, d); });
        } else if (*acf_cmd || *pacf_cmd) {
            const bool is_acf = acf_cmd->parsed();
            const auto& src = is_acf ? acf_src : pacf_src;
            auto series = src.load();
            if (is_acf ? acf_sdiff : pacf_sdiff) series = seasonal_difference(series, series.period(), 1);
            const auto lag = static_cast<std::size_t>(is_acf ? acf_lag : pacf_lag);
            const auto c = is_acf ? acf(series, lag) : pacf(series, lag);
            emit(is_acf ? acf_out : pacf_out, [&](std::ostream& os) { write_correlogram_csv(os, c); });
        } else if (*lb_cmd) {
            std::cout << to_json(ljung_box(lb_src.load(), lb_lags, lb_fitted)).dump() << '\n';
        } else if (*fit_ets) {
            const auto spec = EtsSpec::parse(ets_spec);
            const auto series = ets_src.load();
            auto [train, test] = training_part(series, ets_train_end);
            const auto fit = ets_fit(spec, train);
            auto j = to_json(fit);
            if (test) j["holdout"] = holdout_json(train, fit.fitted, *test, ets_forecast(fit, static_cast<int>(test->size())));
            emit(ets_out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
        } else if (*fit_arima) {
            std::optional<bool> constant;
            if (no_constant) constant = false;
            if (with_constant) constant = true;
            const auto spec = parse_arima_spec(arima_order, arima_seasonal, constant);
            const auto series = arima_src.load();
            auto [train, test] = training_part(series, arima_train_end);
            const auto fit = arima_fit(spec, train);
            auto j = to_json(fit);
            if (test) {
                j["holdout"] = holdout_json(train, fit.fitted, *test, arima_forecast(fit, static_cast<int>(test->size())));
            }
            emit(arima_out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
        } else if (*forecast) {
            const auto j = read_json_file(fc_fit);
            const auto model = j.value("model", std::string());
            Forecast f;
            if (model == "ets") {
                f = ets_forecast(ets_fit_from_json(j), fc_horizon, fc_z);
            } else if (model == "arima") {
                f = arima_forecast(arima_fit_from_json(j), fc_horizon, fc_z);
            } else {
                fail(ErrorKind::Schema, "fit file has no recognised 'model' field");
            }
            emit(fc_out, [&](std::ostream& os) { write_forecast_csv(os, f); });
        } else if (*compare) {
            std::vector<ComparisonEntry> entries;
            for (const auto& path : cmp_fits) {
                const auto j = read_json_file(path);
                if (!j.contains("holdout")) fail(ErrorKind::Schema, "'" + path + "' has no holdout metrics");
                ComparisonEntry e;
                e.label = j.at("label").get<std::string>();
                e.k = j.at("k").get<int>();
                if (!j.at("aicc").is_null()) e.aicc = j.at("aicc").get<double>();
                if (j.at("model") == "arima") {
                    const auto o = j.at("order").get<std::vector<int>>();
                    const auto s = j.at("seasonal").get<std::vector<int>>();
                    e.family = "ARIMA";
                    e.differencing = {o.at(1), s.at(1), s.at(3)};
                } else {
                    e.family = "ETS";
                }
                e.train = metrics_from_json(j.at("holdout").at("train"));
                e.test = metrics_from_json(j.at("holdout").at("test"));
                entries.push_back(std::move(e));
            }
            if (!cmp_ets.empty() || !cmp_arima.empty()) {
                if (cmp_train_end.empty()) fail(ErrorKind::Config, "--train-end is required when fitting");
                const auto series = cmp_src.load();
                const auto cut = *parse_cut(cmp_train_end);
                for (const auto& spec : parse_ets_list(cmp_ets)) {
                    std::optional<EtsFit> fit;
                    auto h = holdout_evaluate(
                        [&](const TimeSeries& tr, int hz) {
                            fit = ets_fit(spec, tr);
                            return ModelRun{fit->fitted, ets_forecast(*fit, hz).point};
                        },
                        series, cut);
                    entries.push_back({spec.label(), "ETS", {0, 0, spec.period}, fit->k, fit->aicc, h.train, h.test});
                }
                for (const auto& spec : parse_arima_list(cmp_arima)) {
                    std::optional<ArimaFit> fit;
                    auto h = holdout_evaluate(
                        [&](const TimeSeries& tr, int hz) {
                            fit = arima_fit(spec, tr);
                            return ModelRun{fit->fitted, arima_forecast(*fit, hz).point};
                        },
                        series, cut);
                    entries.push_back({spec.label(), "ARIMA", spec.differencing(), fit->k, fit->aicc, h.train, h.test});
                }
            }
            if (entries.empty()) fail(ErrorKind::Config, "no models to compare");
            const auto report = compare_models(std::move(entries), {force_aicc});
            std::cout << format_comparison_table(report);
            if (!cmp_json.empty()) emit(cmp_json, [&](std::ostream& os) { os << to_json(report).dump(2) << '\n'; });
        } else if (*study) {
            StudyConfig cfg;
            if (!study_config.empty()) {
                std::ifstream in(study_config);
                if (!in) fail(ErrorKind::Config, "cannot open config '" + study_config + "'");
                for (const auto& [k, v] : read_config_file(in)) apply_setting(cfg, k, v);
                // A relative input path in the file is taken relative to the file itself.
                const std::filesystem::path input(cfg.input_path);
                if (!cfg.input_path.empty() && input.is_relative()) {
                    cfg.input_path = (std::filesystem::path(study_config).parent_path() / input).string();
                }
            }
            if (const char* env = std::getenv("AIRSERIES_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
            auto set = [&](const char* key, const std::string& v) {
                if (!v.empty()) apply_setting(cfg, key, v);
            };
            set("input", st_input);
            set("station", st_station);
            set("variable", st_variable);
            set("train_end", st_train_end);
            set("ets", st_ets);
            set("arima", st_arima);
            set("output_dir", st_output);
            if (st_horizon) cfg.horizon = *st_horizon;
            if (st_coverage) cfg.min_coverage = *st_coverage;
            if (st_force) cfg.force_aicc = true;
            for (const auto& kv : study_sets) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) fail(ErrorKind::Config, "--set expects key=value");
                apply_setting(cfg, detail::trim(std::string_view(kv).substr(0, eq)),
                              detail::trim(std::string_view(kv).substr(eq + 1)));
            }
            const auto result = run_study(cfg);
            if (result.exit_code != ExitCode::Ok) {
                std::cerr << "error: " << result.error.at("error").at("message").get<std::string>() << '\n';
                std::cout << result.error.dump() << '\n';
                return static_cast<int>(result.exit_code);
            }
            if (result.report) std::cout << format_comparison_table(*result.report);
            std::cerr << "wrote " << result.files.size() << " files to " << cfg.output_dir << '\n';
        } else if (*synth) {
            SyntheticConfig cfg;
            cfg.seed = synth_seed;
            cfg.months = synth_months;
            if (synth_hourly.empty() && synth_monthly.empty()) fail(ErrorKind::Config, "give --hourly and/or --monthly");
            if (!synth_hourly.empty()) {
                emit(synth_hourly, [&](std::ostream& os) { write_synthetic_hourly_csv(os, cfg, synth_stations); });
            }
            if (!synth_monthly.empty()) {
                emit(synth_monthly, [&](std::ostream& os) { write_monthly_csv(os, synthetic_monthly(cfg)); });
            }
        }
    } catch (const Error& e) {
        return fail_with(exit_code_for(e.kind()), to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
        return fail_with(ExitCode::Data, "schema", std::string("malformed JSON: ") + e.what());
    } catch (const std::exception& e) {
        return fail_with(ExitCode::Data, "internal", e.what());
    }
    return 0;
}

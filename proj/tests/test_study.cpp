#include <airseries.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace airseries;
namespace fs = std::filesystem;

namespace {

const fs::path kData = AIRSERIES_DATA_DIR;
const std::string kCli = AIRSERIES_CLI;

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("airseries_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

StudyConfig fixture_config(const fs::path& out) {
    StudyConfig cfg;
    cfg.input_path = (kData / "fixture_monthly.csv").string();
    cfg.output_dir = out.string();
    return cfg;
}

int run(const std::string& command) {
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const fs::path& hourly_fixture() {
    static const fs::path path = [] {
        auto dir = scratch("hourly");
        SyntheticConfig cfg;
        cfg.months = 14;
        std::ofstream out(dir / "hourly.csv");
        write_synthetic_hourly_csv(out, cfg, {"Ganseo-gu", "Jongno-gu"});
        return dir / "hourly.csv";
    }();
    return path;
}

} // namespace

TEST(RunStudy, FixtureProducesEveryArtifact) {
    const auto out = scratch("full");
    const auto result = run_study(fixture_config(out));
    ASSERT_EQ(result.exit_code, ExitCode::Ok) << result.error.dump();
    for (auto name : {"monthly_series.csv", "decomposition.csv", "acf_raw.csv", "pacf_raw.csv", "acf_diff.csv",
                      "pacf_diff.csv", "ljung_box.json", "study.json", "comparison.json", "comparison.txt",
                      "fit_ets_AAdA.json", "forecast_ets_AAdA.csv", "fit_arima_2_1_1.json",
                      "fit_arima_0_0_0_0_1_0_12.json", "forecast_arima_0_0_0_0_1_2_12.csv"}) {
        EXPECT_TRUE(fs::exists(out / name)) << name;
    }
    EXPECT_FALSE(fs::exists(out / "error.json"));
    ASSERT_TRUE(result.report);
    EXPECT_EQ(result.report->entries.size(), 13u);
    const auto study = json::parse(slurp(out / "study.json"));
    EXPECT_EQ(study.at("schema_version"), "1");
    EXPECT_EQ(study.at("train_end"), "2018-12");
    EXPECT_EQ(json::parse(slurp(out / "comparison.json")).at("schema_version"), "1");
}

TEST(RunStudy, Deterministic) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    ASSERT_EQ(run_study(fixture_config(a)).exit_code, ExitCode::Ok);
    ASSERT_EQ(run_study(fixture_config(b)).exit_code, ExitCode::Ok);
    for (const auto& entry : fs::directory_iterator(a)) {
        EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path().filename();
    }
}

TEST(RunStudy, CsvOutputsRoundTrip) {
    const auto out = scratch("roundtrip");
    ASSERT_EQ(run_study(fixture_config(out)).exit_code, ExitCode::Ok);
    std::ifstream fixture(kData / "fixture_monthly.csv"), written(out / "monthly_series.csv");
    const auto original = read_monthly_csv(fixture);
    EXPECT_EQ(read_monthly_csv(written), original);

    std::ifstream fc(out / "forecast_ets_AAdA.csv");
    const auto table = read_csv_table(fc);
    EXPECT_EQ(table.header, (std::vector<std::string>{"month", "point", "lower", "upper"}));
    ASSERT_EQ(table.rows.size(), 12u);
    EXPECT_EQ(table.rows[0][0], "2019-01");

    std::ifstream dec(out / "decomposition.csv");
    const auto d = read_csv_table(dec);
    EXPECT_EQ(d.header.size(), 5u);
    EXPECT_EQ(d.rows.size(), 48u);

    std::ifstream acf_in(out / "acf_raw.csv");
    EXPECT_EQ(read_csv_table(acf_in).rows.size(), 24u);

    const auto fit_json = json::parse(slurp(out / "fit_arima_2_1_1.json"));
    const auto rebuilt = arima_fit_from_json(fit_json);
    EXPECT_EQ(rebuilt.spec, ArimaSpec::make(2, 1, 1));
    EXPECT_NEAR(rebuilt.css, fit_json.at("css").get<double>(), 1e-9);
    const auto ets_json = json::parse(slurp(out / "fit_ets_AAdA.json"));
    const auto ets = ets_fit_from_json(ets_json);
    EXPECT_EQ(to_json(ets).dump(), [&] {
        auto j = ets_json;
        j.erase("holdout");
        return j.dump();
    }());
}

TEST(RunStudy, EtsOnly) {
    auto cfg = fixture_config(scratch("ets_only"));
    cfg.arima_candidates.clear();
    const auto result = run_study(cfg);
    EXPECT_EQ(result.exit_code, ExitCode::Ok);
    EXPECT_EQ(result.report->entries.size(), 5u);
}

TEST(RunStudy, HorizonZeroIsConfigError) {
    const auto out = scratch("horizon0");
    auto cfg = fixture_config(out);
    cfg.horizon = 0;
    const auto result = run_study(cfg);
    EXPECT_EQ(result.exit_code, ExitCode::Config);
    EXPECT_FALSE(fs::exists(out / "monthly_series.csv"));
}

TEST(RunStudy, UnknownStationNamesIt) {
    const auto out = scratch("unknown_station");
    StudyConfig cfg;
    cfg.input_path = hourly_fixture().string();
    cfg.station = "Atlantis-gu";
    cfg.output_dir = out.string();
    const auto result = run_study(cfg);
    EXPECT_NE(result.exit_code, ExitCode::Ok);
    const auto err = json::parse(slurp(out / "error.json"));
    EXPECT_NE(err.at("error").at("message").get<std::string>().find("Atlantis-gu"), std::string::npos);
}

TEST(RunStudy, AllCandidatesOfAFamilyFailing) {
    auto cfg = fixture_config(scratch("family_fail"));
    cfg.train_end = MonthStamp(2016, 12); // 24 training months: too short for the seasonal ETS models
    cfg.ets_candidates = {EtsSpec::parse("AAA"), EtsSpec::parse("AAdA")};
    cfg.arima_candidates = {ArimaSpec::make(2, 1, 0)};
    EXPECT_EQ(run_study(cfg).exit_code, ExitCode::AllCandidatesFailed);
}

TEST(StudyConfig, SettingsAndLists) {
    std::istringstream in("# comment\ninput = a.csv\nhorizon = 6\nets = AAdA, ANN\narima = 2,1,1; 0,0,0/0,1,0,12\n");
    StudyConfig cfg;
    for (const auto& [k, v] : read_config_file(in)) apply_setting(cfg, k, v);
    EXPECT_EQ(cfg.input_path, "a.csv");
    EXPECT_EQ(cfg.horizon, 6);
    ASSERT_EQ(cfg.ets_candidates.size(), 2u);
    ASSERT_EQ(cfg.arima_candidates.size(), 2u);
    EXPECT_EQ(cfg.arima_candidates[1], ArimaSpec::make(0, 0, 0, 0, 1, 0, 12));
    EXPECT_THROW(apply_setting(cfg, "colour", "blue"), Error);
    EXPECT_THROW(apply_setting(cfg, "horizon", "six"), Error);
}

TEST(Cli, DecomposeSeasonalColumnSumsToZero) {
    const auto dir = scratch("cli_decompose");
    ASSERT_EQ(run(kCli + " decompose --series " + (kData / "fixture_monthly.csv").string() + " --output " +
                  (dir / "d.csv").string()),
              0);
    std::ifstream in(dir / "d.csv");
    const auto t = read_csv_table(in);
    EXPECT_EQ(t.header, (std::vector<std::string>{"month", "observed", "trend", "seasonal", "random"}));
    for (std::size_t start = 0; start + 12 <= t.rows.size(); start += 12) {
        double sum = 0.0;
        for (std::size_t r = start; r < start + 12; ++r) sum += *t.number(r, "seasonal");
        EXPECT_NEAR(sum, 0.0, 1e-9);
    }
}

TEST(Cli, FitForecastCompare) {
    const auto dir = scratch("cli_pipeline");
    const auto series = (kData / "fixture_monthly.csv").string();
    ASSERT_EQ(run(kCli + " fit-ets --spec AAdA --series " + series + " --train-end 2018-12 --output " +
                  (dir / "ets.json").string()),
              0);
    ASSERT_EQ(run(kCli + " fit-arima --order 0,0,0 --seasonal 0,1,0,12 --series " + series +
                  " --train-end 2018-12 --output " + (dir / "arima.json").string()),
              0);
    ASSERT_EQ(run(kCli + " forecast --fit " + (dir / "ets.json").string() + " --horizon 12 --output " +
                  (dir / "f.csv").string()),
              0);
    std::ifstream fc(dir / "f.csv");
    const auto t = read_csv_table(fc);
    EXPECT_EQ(t.header.size(), 4u);
    EXPECT_EQ(t.rows.size(), 12u);

    ASSERT_EQ(run(kCli + " compare --fit " + (dir / "ets.json").string() + " --fit " + (dir / "arima.json").string() +
                  " --json " + (dir / "cmp.json").string() + " > " + (dir / "table.txt").string()),
              0);
    const auto table = slurp(dir / "table.txt");
    EXPECT_NE(table.find("ETS(A,Ad,A)"), std::string::npos);
    EXPECT_NE(table.find("ARIMA(0,0,0)(0,1,0)[12]"), std::string::npos);
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
    EXPECT_EQ(json::parse(slurp(dir / "cmp.json")).at("entries").size(), 2u);
}

TEST(Cli, StudyExitCodesAndEnvironment) {
    const auto dir = scratch("cli_study");
    const auto cfg = (kData / "study.cfg").string();
    const auto series = (kData / "fixture_monthly.csv").string();
    EXPECT_EQ(run(kCli + " study --config " + cfg + " --input " + series + " --horizon 0 > /dev/null 2>&1"), 2);
    EXPECT_EQ(run("AIRSERIES_OUTPUT_DIR=" + (dir / "env").string() + " " + kCli + " study --config " + cfg +
                  " --input " + series + " > /dev/null 2>&1"),
              0);
    EXPECT_TRUE(fs::exists(dir / "env" / "comparison.json"));
    EXPECT_EQ(run("AIRSERIES_OUTPUT_DIR=" + (dir / "env2").string() + " " + kCli + " study --config " + cfg +
                  " --input " + series + " --output-dir " + (dir / "flag").string() + " > /dev/null 2>&1"),
              0);
    EXPECT_TRUE(fs::exists(dir / "flag" / "comparison.json"));
    EXPECT_FALSE(fs::exists(dir / "env2"));
    EXPECT_EQ(run(kCli + " study --input " + hourly_fixture().string() + " --station Nowhere --output-dir " +
                  (dir / "bad").string() + " > /dev/null 2>&1"),
              3);
}

TEST(Cli, IngestHourly) {
    const auto dir = scratch("cli_ingest");
    ASSERT_EQ(run(kCli + " ingest --input " + hourly_fixture().string() + " --station Ganseo-gu --output " +
                  (dir / "m.csv").string() + " --means " + (dir / "means.json").string() + " --correlations " +
                  (dir / "corr.csv").string() + " 2> /dev/null"),
              0);
    std::ifstream in(dir / "m.csv");
    EXPECT_EQ(read_monthly_csv(in).size(), 14u);
    const auto means = json::parse(slurp(dir / "means.json"));
    EXPECT_EQ(means.at("rows").size(), 2u);
    std::ifstream corr(dir / "corr.csv");
    EXPECT_EQ(read_csv_table(corr).header.size(), 12u);
}

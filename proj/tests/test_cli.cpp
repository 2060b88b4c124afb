#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

// SESSIONCAST_BIN is injected by the build as the path to the CLI executable.

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + SESSIONCAST_BIN " " + args +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

fs::path work_dir() {
    const fs::path p = fs::temp_directory_path() / "sessioncast_cli_tests";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kSynthArgs = "--start 2022-01-01 --end 2022-03-19 "
                               "--cars-workplace 2 --cars-residential 2";

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("") == 2);                       // missing subcommand
    CHECK(run_cli("frobnicate") == 2);             // unknown subcommand
    CHECK(run_cli("synth") == 2);                  // synth requires --out
    CHECK(run_cli("run --mode sideways") == 2);    // invalid enum value
    CHECK(run_cli("run") == 2);                    // missing input files
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("synth --help") == 0);
}

TEST_CASE("runtime errors exit with code 1") {
    const fs::path out = work_dir() / "missing";
    CHECK(run_cli("report " + (work_dir() / "no_such_dir").string()) == 1);
    CHECK(run_cli("run --sessions /nonexistent.csv --weather /n.csv --calendar /n.json --out " +
                  out.string()) == 1);
    CHECK(run_cli("synth --out " + out.string() + " --start 2022-06-01 --end 2022-01-01") == 1);
}

TEST_CASE("synth is deterministic and honors seed precedence") {
    const fs::path a = work_dir() / "synth_a";
    const fs::path b = work_dir() / "synth_b";
    const fs::path c = work_dir() / "synth_c";
    const fs::path d = work_dir() / "synth_d";
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
    fs::remove_all(d);

    REQUIRE(run_cli("synth --seed 5 --out " + a.string() + " " + kSynthArgs) == 0);
    REQUIRE(run_cli("synth --seed 5 --out " + b.string() + " " + kSynthArgs) == 0);
    for (const char* name : {"sessions.csv", "weather.csv", "calendar.json"}) {
        CHECK(slurp(a / name) == slurp(b / name));
    }

    // The environment seed overrides the default seed...
    REQUIRE(run_cli("synth --out " + c.string() + " " + kSynthArgs, "SESSIONCAST_SEED=5") == 0);
    CHECK(slurp(c / "sessions.csv") == slurp(a / "sessions.csv"));

    // ...but an explicit flag beats the environment.
    REQUIRE(run_cli("synth --seed 5 --out " + d.string() + " " + kSynthArgs,
                    "SESSIONCAST_SEED=99") == 0);
    CHECK(slurp(d / "sessions.csv") == slurp(a / "sessions.csv"));
}

TEST_CASE("run produces a complete report directory") {
    const fs::path data = work_dir() / "data";
    const fs::path out = work_dir() / "run_out";
    fs::remove_all(data);
    fs::remove_all(out);
    REQUIRE(run_cli("synth --seed 7 --out " + data.string() + " " + kSynthArgs) == 0);

    const std::string inputs = "--sessions " + (data / "sessions.csv").string() + " --weather " +
                               (data / "weather.csv").string() + " --calendar " +
                               (data / "calendar.json").string();
    REQUIRE(run_cli("run " + inputs + " --seed 7 --weeks 1 --window 60 --cv-k 2 --out " +
                    out.string()) == 0);

    for (const char* name : {"report.json", "week_000.json", "metrics.csv", "closest_models.csv",
                             "feature_importance.csv", "base_models.csv"}) {
        CHECK(fs::exists(out / name));
    }
    const std::string report = slurp(out / "report.json");
    CHECK(report.find("\"config\"") != std::string::npos);
    CHECK(report.find("\"seed\": 7") != std::string::npos);
    CHECK(report.find("\"command\": \"run\"") != std::string::npos);

    CHECK(run_cli("report " + out.string()) == 0);

    // Re-running with the same seed reproduces the report byte for byte.
    const fs::path out2 = work_dir() / "run_out2";
    fs::remove_all(out2);
    REQUIRE(run_cli("run " + inputs + " --seed 7 --weeks 1 --window 60 --cv-k 2 --out " +
                    out2.string()) == 0);
    std::string report2 = slurp(out2 / "report.json");
    const std::string from = out2.string(), to = out.string();
    for (std::size_t p = report2.find(from); p != std::string::npos; p = report2.find(from)) {
        report2.replace(p, from.size(), to);  // only the echoed out dir may differ
    }
    CHECK(report2 == report);
    CHECK(slurp(out2 / "metrics.csv") == slurp(out / "metrics.csv"));
}

TEST_CASE("config file values apply but flags win") {
    const fs::path data = work_dir() / "data_cfg";
    const fs::path out = work_dir() / "cfg_out";
    fs::remove_all(data);
    fs::remove_all(out);
    REQUIRE(run_cli("synth --seed 3 --out " + data.string() + " " + kSynthArgs) == 0);

    const fs::path cfg_path = work_dir() / "config.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << "{\n"
            << "  \"sessions\": \"" << (data / "sessions.csv").string() << "\",\n"
            << "  \"weather\": \"" << (data / "weather.csv").string() << "\",\n"
            << "  \"calendar\": \"" << (data / "calendar.json").string() << "\",\n"
            << "  \"seed\": 3,\n"
            << "  \"n_weeks\": 9,\n"
            << "  \"cv_k\": 2,\n"
            << "  \"initial_window_days\": 60\n"
            << "}\n";
    }
    // n_weeks 9 from the file would run past the data; the flag overrides it.
    REQUIRE(run_cli("run --config " + cfg_path.string() + " --weeks 1 --out " + out.string()) ==
            0);
    const std::string report = slurp(out / "report.json");
    CHECK(report.find("\"n_weeks\": 1") != std::string::npos);
    CHECK(report.find("\"seed\": 3") != std::string::npos);
    CHECK(report.find("\"cv_k\": 2") != std::string::npos);

    CHECK(run_cli("run --config " + (work_dir() / "nope.json").string()) == 1);
}

TEST_CASE("lookback writes per-window results") {
    const fs::path data = work_dir() / "data_lb";
    const fs::path out = work_dir() / "lb_out";
    fs::remove_all(data);
    fs::remove_all(out);
    REQUIRE(run_cli("synth --seed 9 --out " + data.string() + " --start 2022-01-01 "
                    "--end 2022-05-07 --cars-workplace 2 --cars-residential 2") == 0);

    const std::string inputs = "--sessions " + (data / "sessions.csv").string() + " --weather " +
                               (data / "weather.csv").string() + " --calendar " +
                               (data / "calendar.json").string();
    REQUIRE(run_cli("lookback " + inputs +
                    " --seed 9 --weeks 1 --window 60 --cv-k 2 --windows 60 --windows 90 --out " +
                    out.string()) == 0);
    CHECK(fs::exists(out / "lookback.json"));
    const std::string csv = slurp(out / "lookback.csv");
    CHECK(csv.find("window_days") != std::string::npos);
    CHECK(csv.find("\n60,") != std::string::npos);
    CHECK(csv.find("\n90,") != std::string::npos);
}

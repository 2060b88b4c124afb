#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "sessioncast/report.hpp"

namespace sc = sessioncast;

namespace {

struct CliConfig {
    std::string config_path;
    std::string sessions_path;
    std::string weather_path;
    std::string calendar_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int n_weeks = 4;
    int n_cars_workplace = 0;    // 0 = generator default
    int n_cars_residential = 0;  // 0 = generator default
    std::string start_date = "2022-01-01";
    std::string end_date = "2024-01-01";
    std::string mode = "growing";
    std::string profile = "fast";
    std::size_t replay_cap = 5000;
    int cv_k = 5;
    int initial_window_days = 365;
    std::size_t svr_row_cap = 5000;
    int utc_offset_hours = 1;
    int jobs = 1;
    std::vector<int> windows;
};

// Precedence: config file < SESSIONCAST_SEED < explicit flags.
void apply_config_file(CliConfig& cfg, const CLI::App& cmd) {
    if (cfg.config_path.empty()) return;
    std::ifstream in(cfg.config_path);
    if (!in) throw std::runtime_error("cannot read config file: " + cfg.config_path);
    nlohmann::json j = nlohmann::json::parse(in);
    auto flag_set = [&cmd](const std::string& name) {
        const CLI::Option* opt = cmd.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    auto take = [&](const char* key, auto& field, const std::string& flag) {
        if (j.contains(key) && !flag_set(flag)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("sessions", cfg.sessions_path, "--sessions");
    take("weather", cfg.weather_path, "--weather");
    take("calendar", cfg.calendar_path, "--calendar");
    take("out", cfg.out_dir, "--out");
    take("n_weeks", cfg.n_weeks, "--weeks");
    take("mode", cfg.mode, "--mode");
    take("profile", cfg.profile, "--profile");
    take("replay_cap", cfg.replay_cap, "--replay-cap");
    take("cv_k", cfg.cv_k, "--cv-k");
    take("initial_window_days", cfg.initial_window_days, "--window");
    take("svr_row_cap", cfg.svr_row_cap, "--svr-row-cap");
    take("utc_offset_hours", cfg.utc_offset_hours, "--utc-offset");
    take("start_date", cfg.start_date, "--start");
    take("end_date", cfg.end_date, "--end");
    take("n_cars_workplace", cfg.n_cars_workplace, "--cars-workplace");
    take("n_cars_residential", cfg.n_cars_residential, "--cars-residential");
    take("windows", cfg.windows, "--windows");
    if (j.contains("seed") && !flag_set("--seed") &&
        std::getenv("SESSIONCAST_SEED") == nullptr) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
}

void apply_seed_env(CliConfig& cfg, const CLI::App& cmd) {
    const CLI::Option* opt = cmd.get_option_no_throw("--seed");
    if (opt != nullptr && opt->count() > 0) return;
    if (const char* env = std::getenv("SESSIONCAST_SEED")) {
        cfg.seed = std::strtoull(env, nullptr, 10);
    }
}

sc::RunSettings make_settings(const CliConfig& cfg) {
    if (cfg.n_weeks < 1) throw std::runtime_error("n_weeks must be >= 1");
    if (cfg.cv_k < 2) throw std::runtime_error("cv_k must be >= 2");
    if (cfg.initial_window_days < 60) throw std::runtime_error("window must be >= 60 days");
    sc::RunSettings s;
    s.seed = cfg.seed;
    s.cv_k = cfg.cv_k;
    s.profile = cfg.profile == "full" ? sc::GridProfile::Full : sc::GridProfile::Fast;
    s.utc_offset_hours = cfg.utc_offset_hours;
    s.initial_window_days = cfg.initial_window_days;
    s.svr_row_cap = cfg.svr_row_cap;
    s.mode = cfg.mode == "replay" ? sc::IncrementalMode::Replay : sc::IncrementalMode::Growing;
    s.replay_cap = cfg.replay_cap;
    return s;
}

nlohmann::json config_echo(const CliConfig& cfg, const char* command) {
    nlohmann::json j;
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["sessions"] = cfg.sessions_path;
    j["weather"] = cfg.weather_path;
    j["calendar"] = cfg.calendar_path;
    j["out"] = cfg.out_dir;
    j["n_weeks"] = cfg.n_weeks;
    j["mode"] = cfg.mode;
    j["replay_cap"] = cfg.replay_cap;
    j["profile"] = cfg.profile;
    j["cv_k"] = cfg.cv_k;
    j["initial_window_days"] = cfg.initial_window_days;
    j["svr_row_cap"] = cfg.svr_row_cap;
    j["utc_offset_hours"] = cfg.utc_offset_hours;
    if (!cfg.windows.empty()) j["windows"] = cfg.windows;
    return j;
}

struct LoadedData {
    std::vector<sc::ChargingSession> sessions;
    sc::WeatherMap weather;
    sc::CalendarInfo calendar;
};

LoadedData load_inputs(const CliConfig& cfg) {
    if (cfg.sessions_path.empty() || cfg.weather_path.empty() || cfg.calendar_path.empty()) {
        throw CLI::ValidationError("--sessions, --weather, and --calendar are required");
    }
    LoadedData data;
    data.sessions = sc::clean_sessions(sc::parse_sessions(cfg.sessions_path)).kept;
    std::sort(data.sessions.begin(), data.sessions.end(),
              [](const auto& a, const auto& b) { return a.arrival < b.arrival; });
    data.weather = sc::load_weather(cfg.weather_path);
    data.calendar = sc::load_calendar(cfg.calendar_path);
    return data;
}

void print_summary(const sc::HorizonResult& result) {
    std::cout << std::left << std::setw(14) << "location" << std::setw(10) << "target"
              << std::setw(10) << "model" << std::right << std::setw(10) << "rmse"
              << std::setw(10) << "mae" << std::setw(10) << "r2" << std::setw(8) << "n" << "\n";
    for (const auto& [key, cell] : result.aggregate) {
        auto line = [&](const char* model, const sc::Metrics& m) {
            std::cout << std::left << std::setw(14) << sc::to_string(key.first) << std::setw(10)
                      << sc::to_string(key.second) << std::setw(10) << model << std::right
                      << std::fixed << std::setprecision(3) << std::setw(10) << m.rmse
                      << std::setw(10) << m.mae << std::setw(10) << m.r2 << std::setw(8) << m.n
                      << "\n";
            std::cout.unsetf(std::ios::fixed);
        };
        line("ensemble", cell.ensemble);
        for (std::size_t b = 0; b < sc::kNumBases; ++b) {
            line(sc::to_string(sc::kFamilies[b]), cell.family[b]);
        }
    }
}

int cmd_synth(const CliConfig& cfg) {
    sc::SynthConfig sconf = sc::default_synth_config();
    sconf.seed = cfg.seed;
    auto start = sc::parse_date(cfg.start_date);
    auto end = sc::parse_date(cfg.end_date);
    if (!start || !end || !(*start < *end)) throw std::runtime_error("invalid date range");
    sconf.start_date = *start;
    sconf.end_date = *end;
    sconf.utc_offset_hours = cfg.utc_offset_hours;
    if (cfg.n_cars_workplace > 0) sconf.workplace.n_cars = cfg.n_cars_workplace;
    if (cfg.n_cars_residential > 0) sconf.residential.n_cars = cfg.n_cars_residential;

    const std::filesystem::path out(cfg.out_dir);
    std::filesystem::create_directories(out);
    const auto sessions = sc::gen_sessions(sconf);
    sc::write_sessions(out / "sessions.csv", sessions);
    sc::write_weather(out / "weather.csv",
                      sc::gen_weather(sconf.seed, sconf.start_date, sconf.end_date));
    sc::write_calendar(out / "calendar.json", sc::gen_calendar(sconf.start_date, sconf.end_date));
    std::cout << "wrote " << sessions.size() << " sessions to " << (out / "sessions.csv").string()
              << "\n";
    return 0;
}

int cmd_run(const CliConfig& cfg) {
    const LoadedData data = load_inputs(cfg);
    const sc::RunSettings settings = make_settings(cfg);
    const sc::HorizonResult result =
        sc::run_horizon(data.sessions, data.weather, data.calendar, cfg.n_weeks, settings);
    sc::write_run_report(cfg.out_dir, result, config_echo(cfg, "run"));
    print_summary(result);
    return 0;
}

int cmd_lookback(const CliConfig& cfg) {
    const LoadedData data = load_inputs(cfg);
    const sc::RunSettings settings = make_settings(cfg);
    std::vector<int> windows = cfg.windows;
    if (windows.empty()) {
        windows.assign(sc::kDefaultLookbackWindows.begin(), sc::kDefaultLookbackWindows.end());
    }
    std::sort(windows.begin(), windows.end());
    const auto study = sc::lookback_study(data.sessions, data.weather, data.calendar, windows,
                                          cfg.n_weeks, settings);
    sc::write_lookback_report(cfg.out_dir, study, config_echo(cfg, "lookback"));
    for (const auto& [window, result] : study) {
        std::cout << "window " << window << " days:\n";
        print_summary(result);
    }
    return 0;
}

int cmd_report(const std::string& run_dir) {
    const std::filesystem::path report_path = std::filesystem::path(run_dir) / "report.json";
    std::ifstream in(report_path);
    if (!in) throw std::runtime_error("cannot read " + report_path.string());
    const nlohmann::json report = nlohmann::json::parse(in);
    std::cout << std::left << std::setw(28) << "stratum" << std::setw(10) << "model"
              << std::right << std::setw(10) << "rmse" << std::setw(10) << "mae" << std::setw(10)
              << "r2" << "\n";
    for (const auto& [stratum, cell] : report.at("aggregate").items()) {
        auto line = [&](const std::string& model, const nlohmann::json& m) {
            std::cout << std::left << std::setw(28) << stratum << std::setw(10) << model
                      << std::right << std::fixed << std::setprecision(3) << std::setw(10)
                      << m.at("rmse").get<double>() << std::setw(10) << m.at("mae").get<double>()
                      << std::setw(10) << m.at("r2").get<double>() << "\n";
            std::cout.unsetf(std::ios::fixed);
        };
        line("ensemble", cell.at("ensemble"));
        for (const auto& [model, m] : cell.at("base_models").items()) line(model, m);
    }
    return 0;
}

void add_common(CLI::App* cmd, CliConfig& cfg) {
    cmd->add_option("--config", cfg.config_path, "JSON config file (flags win over file)");
    cmd->add_option("--seed", cfg.seed, "master RNG seed");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--utc-offset", cfg.utc_offset_hours, "UTC offset hours for local features");
    cmd->add_option("--jobs", cfg.jobs, "worker cap (runs are sequential; kept for scripts)");
}

void add_run_options(CLI::App* cmd, CliConfig& cfg) {
    cmd->add_option("--sessions", cfg.sessions_path, "sessions CSV");
    cmd->add_option("--weather", cfg.weather_path, "weather CSV");
    cmd->add_option("--calendar", cfg.calendar_path, "calendar JSON");
    cmd->add_option("--weeks", cfg.n_weeks, "number of weekly iterations");
    cmd->add_option("--mode", cfg.mode, "growing | replay")
        ->check(CLI::IsMember({"growing", "replay"}));
    cmd->add_option("--replay-cap", cfg.replay_cap, "replay buffer row cap");
    cmd->add_option("--profile", cfg.profile, "full | fast hyperparameter grids")
        ->check(CLI::IsMember({"full", "fast"}));
    cmd->add_option("--cv-k", cfg.cv_k, "cross-validation folds");
    cmd->add_option("--window", cfg.initial_window_days, "initial training window (days)");
    cmd->add_option("--svr-row-cap", cfg.svr_row_cap, "SVR training row cap");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sessioncast: per-session EV charging demand and duration forecasting"};
    app.require_subcommand(1);

    CliConfig cfg;
    std::string report_dir;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic session dataset");
    add_common(synth, cfg);
    synth->add_option("--start", cfg.start_date, "first day (YYYY-MM-DD)");
    synth->add_option("--end", cfg.end_date, "day after the last day (YYYY-MM-DD)");
    synth->add_option("--cars-workplace", cfg.n_cars_workplace, "workplace fleet size");
    synth->add_option("--cars-residential", cfg.n_cars_residential, "residential fleet size");
    synth->get_option("--out")->required();

    CLI::App* run = app.add_subcommand("run", "weekly incremental forecasting run");
    add_common(run, cfg);
    add_run_options(run, cfg);

    CLI::App* lookback = app.add_subcommand("lookback", "training-window size study");
    add_common(lookback, cfg);
    add_run_options(lookback, cfg);
    lookback->add_option("--windows", cfg.windows, "lookback windows in days");

    CLI::App* report = app.add_subcommand("report", "summarize an existing run directory");
    report->add_option("dir", report_dir, "run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        if (active != report) {
            apply_config_file(cfg, *active);
            apply_seed_env(cfg, *active);
        }
        if (active == synth) return cmd_synth(cfg);
        if (active == run) return cmd_run(cfg);
        if (active == lookback) return cmd_lookback(cfg);
        return cmd_report(report_dir);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

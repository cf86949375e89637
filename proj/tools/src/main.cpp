#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "loadcast/http_server.hpp"
#include "loadcast/service.hpp"

using namespace loadcast;

namespace {

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) {
        g_server->stop();
    }
}

int exit_code(ErrorCode code) {
    return code == ErrorCode::internal ? 2 : 1;
}

Timestamp system_now() {
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFound("cannot open " + path);
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct Options {
    std::string config_file;
    std::string data_dir;
    std::string format = "json";
    std::string country;
    std::string file;
    std::string source = "total_load";
    std::string from;
    std::string to;
    std::string now;
    int horizon = 0;
    bool deciles = false;
    bool verbose = false;
};

EngineConfig make_config(const Options& o) {
    EngineConfig c = o.config_file.empty() ? EngineConfig{} : load_engine_config(o.config_file);
    if (!o.data_dir.empty()) {
        c.data_dir = o.data_dir;
        if (o.config_file.empty()) {
            c.calendar_dir.clear();
        }
    }
    c.validate();
    return c;
}

Timestamp now_of(const Options& o) {
    return o.now.empty() ? system_now() : parse_timestamp(o.now);
}

Period period_of(const Options& o) {
    return Period{parse_timestamp(o.from), parse_timestamp(o.to)};
}

void print(const nlohmann::json& payload) {
    std::cout << payload.dump(2) << '\n';
}

int serve(Engine& engine, Api& api) {
    HttpServer server(api);
    const auto& cfg = engine.config();
    const int port = server.bind(cfg.listen_host, cfg.listen_port);
    spdlog::info("listening on {}:{}", cfg.listen_host, port);

    Scheduler scheduler(engine);
    std::jthread worker([&](std::stop_token stop) { scheduler.run(stop, system_now); });

    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen();
    g_server = nullptr;
    worker.request_stop();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hourly electricity load forecasting service"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_file, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--data-dir", o.data_dir, "Document store root (overrides the config)");
    app.add_flag("-v,--verbose", o.verbose, "Debug logging");

    auto* ingest = app.add_subcommand("ingest", "Store a load CSV export");
    ingest->add_option("file", o.file, "CSV file")->required();
    ingest->add_option("--country", o.country, "Country code")->required();
    ingest->add_option("--source", o.source, "total_load or vertical_load");

    auto* audit = app.add_subcommand("audit", "Data quality report for every stored country");
    audit->add_option("--from", o.from, "Period start")->required();
    audit->add_option("--to", o.to, "Period end (exclusive)")->required();
    audit->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));

    auto* train = app.add_subcommand("train", "Rebuild the models of one country");
    train->add_option("--country", o.country, "Country code")->required();
    train->add_flag("--deciles", o.deciles, "Also train the nine decile models");
    train->add_option("--now", o.now, "Training timestamp (default: current time)");

    auto* forecast = app.add_subcommand("forecast", "Issue the next 24 hourly forecasts");
    forecast->add_option("--country", o.country, "Country code")->required();
    forecast->add_option("--now", o.now, "Issue time (default: current time)");

    auto* evaluate = app.add_subcommand("evaluate", "Back-test stored forecasts against actuals");
    evaluate->add_option("--country", o.country, "Country code")->required();
    evaluate->add_option("--from", o.from, "Period start")->required();
    evaluate->add_option("--to", o.to, "Period end (exclusive)")->required();
    evaluate->add_option("--horizon", o.horizon, "Only score this horizon")->check(CLI::Range(1, kMaxHorizon));
    evaluate->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API and the scheduler");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);
    spdlog::set_default_logger(spdlog::stderr_color_mt("loadcast"));

    try {
        Engine engine(make_config(o));
        Api api(engine);
        if (*ingest) {
            print(api.ingest(o.country, read_file(o.file), source_from_string(o.source)));
        } else if (*audit) {
            const auto period = period_of(o);
            if (o.format == "text") {
                std::cout << render_report(api.quality_reports(period));
            } else {
                print(api.quality(period));
            }
        } else if (*train) {
            std::optional<bool> deciles;
            if (o.deciles) {
                deciles = true;
            }
            print(api.rebuild(o.country, now_of(o), deciles));
        } else if (*forecast) {
            print(api.issue_forecast(o.country, now_of(o)));
        } else if (*evaluate) {
            const std::optional<int> horizon = o.horizon > 0 ? std::optional<int>(o.horizon) : std::nullopt;
            const auto result = api.evaluation(o.country, period_of(o), horizon);
            if (o.format == "text") {
                std::cout << result.render();
            } else {
                print(result.to_json());
            }
        } else if (*serve_cmd) {
            return serve(engine, api);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

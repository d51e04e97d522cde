#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "fascai/config.hpp"
#include "fascai/errors.hpp"
#include "fascai/event_log.hpp"
#include "fascai/harness.hpp"
#include "fascai/service.hpp"

namespace fs = std::filesystem;
using namespace fascai;

namespace {

constexpr const char* kEventsFile = "events.jsonl";
constexpr const char* kMetricsFile = "metrics.csv";
constexpr const char* kSummaryFile = "summary.txt";
constexpr const char* kConfigFile = "config.json";

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw StorageError("cannot write " + path.string());
    out << content;
    if (!out.flush())
        throw StorageError("write failed for " + path.string());
}

int simulate(const fs::path& config_path, const fs::path& out_dir, std::optional<std::uint64_t> seed)
{
    AppConfig cfg = load_config(config_path);
    if (seed)
        cfg.experiment.seed = *seed;
    cfg.experiment.validate();

    const ExperimentResult result = run_experiment(cfg.experiment);

    fs::create_directories(out_dir);
    std::string log;
    for (const auto& arm : result.arms)
        for (const auto& t : arm.transcripts)
            for (const auto& r : records_of(simulation_session_id(arm.arm), t))
                log += to_line(r);
    write_file(out_dir / kEventsFile, log);
    write_file(out_dir / kMetricsFile, metrics_csv(result.report));
    write_file(out_dir / kSummaryFile, metrics_summary(result.report));
    write_file(out_dir / kConfigFile, config_to_json(cfg).dump(2) + "\n");

    std::cout << metrics_summary(result.report);
    std::cerr << "wrote " << (out_dir / kEventsFile).string() << " and "
              << (out_dir / kMetricsFile).string() << "\n";
    return 0;
}

MetricsParams params_for(const fs::path& dir)
{
    const fs::path cfg = dir / kConfigFile;
    if (fs::exists(cfg))
        return load_config(cfg).experiment.metrics_params();
    return ExperimentConfig{}.metrics_params();
}

fs::path events_path(const fs::path& in)
{
    return fs::is_directory(in) ? in / kEventsFile : in;
}

int report(const fs::path& in, const std::optional<fs::path>& out)
{
    const fs::path dir = fs::is_directory(in) ? in : in.parent_path();
    const LogReplay replay = replay_log(events_path(in));
    for (const auto& e : replay.errors)
        std::cerr << "error: " << e << "\n";
    if (!replay.errors.empty())
        return 1;
    const std::string csv = metrics_csv(compute_metrics(replay.complete, params_for(dir)));
    if (out)
        write_file(*out, csv);
    else
        std::cout << csv;
    return 0;
}

int validate(const fs::path& in)
{
    const LogReplay replay = replay_log(events_path(in));
    for (const auto& id : replay.incomplete)
        std::cerr << "warning: trial " << id << " was never finalized and is dropped\n";
    if (replay.torn_lines)
        std::cerr << "warning: ignoring a torn final line\n";
    for (const auto& e : replay.errors)
        std::cerr << "invalid: " << e << "\n";
    std::cout << replay.complete.size() << " complete trials, " << replay.incomplete.size()
              << " incomplete, " << replay.errors.size() << " invalid\n";
    return replay.errors.empty() ? 0 : 1;
}

int serve(const fs::path& config_path, std::optional<int> port)
{
    AppConfig cfg = load_config(config_path);
    apply_env_overrides(cfg);
    if (port)
        cfg.service.port = *port;

    // Signals are handled on a dedicated thread so stop() runs outside a handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    fs::create_directories(cfg.service.data_dir);
    const fs::path log_path = cfg.service.data_dir / kEventsFile;
    std::optional<LogReplay> previous;
    if (fs::exists(log_path)) {
        previous = replay_log(log_path);
        for (const auto& e : previous->errors)
            std::cerr << "warning: " << e << "\n";
    }
    auto log = std::make_shared<EventLog>(log_path);
    Service service(cfg.experiment, cfg.service, log);
    if (previous)
        service.recover(*previous);

    HttpServer server(service);
    const int bound = server.bind(cfg.service.host, cfg.service.port);
    std::cerr << "listening on " << cfg.service.host << ":" << bound << ", log "
              << log_path.string() << "\n";

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.listen();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"FASCAI value-based nudging: simulations and live sessions"};
    app.require_subcommand(1);

    fs::path config, out_dir, in_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> port;
    std::optional<fs::path> report_out;

    auto* sim = app.add_subcommand("simulate", "run the experiment harness");
    sim->add_option("--config", config, "config file")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--seed", seed, "override the config seed");

    auto* srv = app.add_subcommand("serve", "start the session API");
    srv->add_option("--config", config, "config file")->required();
    srv->add_option("--port", port, "listen port (0 picks one)");

    auto* rep = app.add_subcommand("report", "recompute metrics from an event log");
    rep->add_option("--in", in_dir, "directory holding events.jsonl (or the log itself)")->required();
    rep->add_option("--out", report_out, "write the CSV here instead of stdout");

    auto* val = app.add_subcommand("validate", "replay an event log through the protocol");
    val->add_option("--in", in_dir, "directory holding events.jsonl (or the log itself)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return simulate(config, out_dir, seed);
        if (srv->parsed())
            return serve(config, port);
        if (rep->parsed())
            return report(in_dir, report_out);
        if (val->parsed())
            return validate(in_dir);
    } catch (const std::exception& e) {
        std::cerr << "fascai: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

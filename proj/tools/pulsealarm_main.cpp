#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pulsealarm/commands.hpp"

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("pulsealarm");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("PULSEALARM_LOG"); level && *level)
        spdlog::set_level(spdlog::level::from_str(level));

    CLI::App app{"Pulse-rate triggered alarm: synthesize, run, benchmark and stream pulse waveforms"};
    app.require_subcommand(1);

    pulsealarm::CommandOptions opts;
    std::uint64_t seed = 0;
    std::uint16_t port = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config, "JSON scenario configuration");
        cmd->add_option("--seed", seed, "override every RNG seed");
        cmd->add_option("--out", opts.out, "output path");
    };

    auto* synth = app.add_subcommand("synth", "write a synthetic waveform CSV");
    add_common(synth);
    auto* run = app.add_subcommand("run", "run a wake scenario end to end");
    add_common(run);
    auto* bench = app.add_subcommand("bench", "compare Schmitt and single-threshold detection");
    add_common(bench);

    auto* serve = app.add_subcommand("serve", "receive frames over TCP and run the pipeline");
    add_common(serve);
    serve->add_option("--port", port, "listen port (env PULSEALARM_PORT)");
    serve->add_option("--host", opts.host, "bind address");

    auto* send = app.add_subcommand("send", "replay a waveform CSV as frames over TCP");
    send->add_option("file", opts.file, "waveform CSV")->required();
    send->add_option("--port", port, "server port (env PULSEALARM_PORT)");
    send->add_option("--host", opts.host, "server address");
    send->add_option("--speed", opts.speed, "pacing multiplier, 0 = as fast as possible")->check(CLI::NonNegativeNumber);
    send->add_option("--seed", seed, "seed for corruption injection");
    send->add_option("--corrupt", opts.corrupt, "number of frames to damage in transit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pulsealarm::kExitConfig;
    }

    for (auto* cmd : {synth, run, bench, serve, send}) {
        if (cmd->count("--seed")) opts.seed = seed;
        if (cmd->get_option_no_throw("--port") && cmd->count("--port")) opts.port = port;
    }

    if (*synth) return pulsealarm::cmd_synth(opts, std::cout);
    if (*run) return pulsealarm::cmd_run(opts, std::cout);
    if (*bench) return pulsealarm::cmd_bench(opts, std::cout);
    if (*serve) return pulsealarm::cmd_serve(opts, std::cout);
    return pulsealarm::cmd_send(opts, std::cout);
}

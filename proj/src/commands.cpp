#include "pulsealarm/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>

#include <spdlog/spdlog.h>

#include "pulsealarm/bench.hpp"
#include "pulsealarm/config.hpp"
#include "pulsealarm/errors.hpp"
#include "pulsealarm/ingest.hpp"
#include "pulsealarm/net.hpp"
#include "pulsealarm/pipeline.hpp"
#include "pulsealarm/waveform.hpp"

namespace pulsealarm {

namespace {

template <class Fn>
int guarded(const char* command, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        spdlog::error("{}: configuration error: {}", command, e.what());
        return kExitConfig;
    } catch (const SpecError& e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitConfig;
    } catch (const DomainError& e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitConfig;
    } catch (const ScenarioError& e) {
        spdlog::error("{}: scenario error: {}", command, e.what());
        return kExitConfig;
    } catch (const StateError& e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitConfig;
    } catch (const ParseError& e) {
        spdlog::error("{}: parse error: {}", command, e.what());
        return kExitIo;
    } catch (const Error& e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitIo;
    }
}

ScenarioConfig load_options(const CommandOptions& opts) {
    ScenarioConfig config = opts.config ? load_config(*opts.config) : parse_config("{}");
    if (opts.seed) apply_seed(config, *opts.seed);
    return config;
}

std::optional<std::filesystem::path> output_path(const CommandOptions& opts, const ScenarioConfig& config) {
    return opts.out ? opts.out : config.output;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    return file;
}

int finish_report(const RunReport& report, const std::optional<std::filesystem::path>& path, std::ostream& out) {
    if (path) {
        auto file = open_output(*path);
        write_report_jsonl(report, file);
        if (!file) throw IoError("write failed: " + path->string());
    } else {
        write_report_jsonl(report, out);
    }
    write_report_summary(report, out);
    return report.phase_matches() ? kExitOk : kExitUnexpectedPhase;
}

}  // namespace

std::uint16_t resolve_port(const CommandOptions& opts) {
    if (opts.port) return *opts.port;
    if (const char* env = std::getenv("PULSEALARM_PORT"); env && *env) {
        char* end = nullptr;
        const long port = std::strtol(env, &end, 10);
        if (*end != '\0' || port < 0 || port > 65535) throw ConfigError("PULSEALARM_PORT is not a valid port");
        return static_cast<std::uint16_t>(port);
    }
    return kDefaultPort;
}

int cmd_synth(const CommandOptions& opts, std::ostream& out) {
    return guarded("synth", [&] {
        const auto config = load_options(opts);
        const auto path = output_path(opts, config);
        if (!path) throw ConfigError("synth needs an output path (--out or \"output\")");

        WaveformSpec spec;
        if (config.waveform) {
            spec = *config.waveform;
        } else if (config.scenario) {
            spec = resolve_run(config).scenario->spec;
        } else if (config.seed) {
            spec.rng_seed = *config.seed;
        }
        const auto wave = synthesize(spec);
        write_waveform(wave.samples, *path);

        const auto& beats = wave.truth.beat_times_ms;
        out << "wrote " << wave.samples.size() << " samples to " << path->string() << '\n';
        out << "ground truth: " << beats.size() << " beats";
        if (!beats.empty()) out << " from " << beats.front() << " ms to " << beats.back() << " ms";
        out << '\n';
        for (const auto& seg : wave.truth.segments) out << "  segment @" << seg.start_ms << " ms: " << seg.bpm << " bpm\n";
        return static_cast<int>(kExitOk);
    });
}

int cmd_run(const CommandOptions& opts, std::ostream& out) {
    return guarded("run", [&] {
        const auto config = load_options(opts);
        const auto run = resolve_run(config);
        spdlog::debug("run: {} samples, alarm at {} ms", run.samples.size(), run.pipeline.alarm_time_ms);
        const auto report = run_pipeline(run.samples, run.pipeline);
        return finish_report(report, output_path(opts, config), out);
    });
}

int cmd_bench(const CommandOptions& opts, std::ostream& out) {
    return guarded("bench", [&] {
        const auto config = load_options(opts);
        const auto result = run_bench(config.bench);
        write_bench_table(result, config.bench, out);
        if (const auto path = output_path(opts, config)) {
            auto file = open_output(*path);
            write_bench_csv(result, file);
        } else {
            write_bench_csv(result, out);
        }
        return static_cast<int>(kExitOk);
    });
}

int cmd_serve(const CommandOptions& opts, std::ostream& out, const std::function<void(std::uint16_t)>& on_listening) {
    return guarded("serve", [&] {
        const auto config = load_options(opts);
        const auto pipeline = resolve_pipeline(config);
        const net::Listener listener(resolve_port(opts), opts.host);
        spdlog::info("serve: listening on {}:{}", opts.host, listener.port());
        if (on_listening) on_listening(listener.port());

        const auto report = net::serve_once(listener, pipeline);
        spdlog::info("serve: peer closed after {} frames", report.ingest ? report.ingest->samples : 0);
        return finish_report(report, output_path(opts, config), out);
    });
}

int cmd_send(const CommandOptions& opts, std::ostream& out) {
    return guarded("send", [&] {
        if (!opts.file) throw ConfigError("send needs a waveform file");
        const auto samples = read_waveform(*opts.file);
        check_monotone(samples);

        const std::uint64_t seed = opts.seed.value_or(1);
        const auto damaged = ingest::choose_corrupt_frames(samples.size(), opts.corrupt, seed);
        const std::set<std::size_t> damaged_set(damaged.begin(), damaged.end());

        const auto socket = net::connect_to(opts.host, resolve_port(opts));
        std::size_t index = 0;
        const auto sent = ingest::replay_samples(
            samples,
            [&](std::span<const std::uint8_t> bytes) {
                ingest::Frame frame;
                std::copy(bytes.begin(), bytes.end(), frame.begin());
                if (damaged_set.count(index)) ingest::corrupt_frame(frame, seed + index);
                ++index;
                socket.send_all(frame);
            },
            opts.speed);
        out << "sent " << sent << " frames, corrupted " << damaged.size() << '\n';
        return static_cast<int>(kExitOk);
    });
}

}  // namespace pulsealarm

#pragma once

// Subcommand implementations behind the `pulsealarm` CLI. Each returns the
// process exit code:
//   0  final phase matched the expectation (or the command succeeded)
//   1  final phase differed from the expectation
//   2  configuration / specification error
//   3  I/O or protocol-fatal error

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace pulsealarm {

enum ExitCode : int {
    kExitOk = 0,
    kExitUnexpectedPhase = 1,
    kExitConfig = 2,
    kExitIo = 3,
};

inline constexpr std::uint16_t kDefaultPort = 9750;

struct CommandOptions {
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint16_t> port;
    double speed = 0.0;
    std::optional<std::filesystem::path> file;  // send: waveform to replay
    std::size_t corrupt = 0;                    // send: frames to damage
    std::string host = "127.0.0.1";
};

int cmd_synth(const CommandOptions& opts, std::ostream& out);
int cmd_run(const CommandOptions& opts, std::ostream& out);
int cmd_bench(const CommandOptions& opts, std::ostream& out);
// on_listening receives the bound port (useful with port 0).
int cmd_serve(const CommandOptions& opts, std::ostream& out,
              const std::function<void(std::uint16_t)>& on_listening = {});
int cmd_send(const CommandOptions& opts, std::ostream& out);

// Port from options, else $PULSEALARM_PORT, else kDefaultPort.
std::uint16_t resolve_port(const CommandOptions& opts);

}  // namespace pulsealarm

#pragma once

// Loopback-style TCP transport for the frame protocol.

#include <cstdint>
#include <span>
#include <string>

#include "pulsealarm/pipeline.hpp"

namespace pulsealarm::net {

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(other.release()) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    int release() noexcept;

    // Writes everything or throws IoError.
    void send_all(std::span<const std::uint8_t> bytes) const;

private:
    int fd_ = -1;
};

class Listener {
public:
    // Port 0 picks an ephemeral port; see port().
    explicit Listener(std::uint16_t port, const std::string& host = "127.0.0.1");

    std::uint16_t port() const noexcept { return port_; }
    Socket accept() const;

private:
    Socket socket_;
    std::uint16_t port_ = 0;
};

Socket connect_to(const std::string& host, std::uint16_t port);

// Accepts one connection and runs the pipeline on the decoded frames until the
// peer closes. A reader thread feeds a ByteChannel; decoding and the pipeline
// run on the calling thread. Corruption is counted, never fatal.
RunReport serve_once(const Listener& listener, const PipelineConfig& config);

}  // namespace pulsealarm::net

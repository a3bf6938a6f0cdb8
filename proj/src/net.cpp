#include "pulsealarm/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "pulsealarm/errors.hpp"
#include "pulsealarm/ingest.hpp"

namespace pulsealarm::net {

namespace {

[[noreturn]] void fail(const std::string& what) { throw IoError(what + ": " + std::strerror(errno)); }

sockaddr_in make_address(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw IoError("bad IPv4 address '" + host + "'");
    return addr;
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.release();
    }
    return *this;
}

Socket::~Socket() {
    if (fd_ >= 0) ::close(fd_);
}

int Socket::release() noexcept {
    const int fd = fd_;
    fd_ = -1;
    return fd;
}

void Socket::send_all(std::span<const std::uint8_t> bytes) const {
    while (!bytes.empty()) {
        const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        bytes = bytes.subspan(static_cast<std::size_t>(n));
    }
}

Listener::Listener(std::uint16_t port, const std::string& host) {
    socket_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (!socket_.valid()) fail("socket");
    const int yes = 1;
    ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);

    auto addr = make_address(host, port);
    if (::bind(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) fail("bind");
    if (::listen(socket_.fd(), 1) < 0) fail("listen");

    socklen_t len = sizeof addr;
    if (::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), &len) < 0) fail("getsockname");
    port_ = ntohs(addr.sin_port);
}

Socket Listener::accept() const {
    for (;;) {
        const int fd = ::accept(socket_.fd(), nullptr, nullptr);
        if (fd >= 0) return Socket(fd);
        if (errno != EINTR) fail("accept");
    }
}

Socket connect_to(const std::string& host, std::uint16_t port) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("socket");
    auto addr = make_address(host, port);
    if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) fail("connect");
    return s;
}

RunReport serve_once(const Listener& listener, const PipelineConfig& config) {
    Pipeline pipeline(config);
    Socket peer = listener.accept();
    ingest::ByteChannel channel;

    std::thread reader([&] {
        std::vector<std::uint8_t> buf(4096);
        for (;;) {
            const auto n = ::recv(peer.fd(), buf.data(), buf.size(), 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;  // orderly close or reset: report what arrived
            if (!channel.push({buf.begin(), buf.begin() + n})) break;
        }
        channel.close();
    });

    ingest::Decoder decoder;
    ingest::DecodeCounts counts;
    std::optional<std::int64_t> last_t;
    std::size_t dropped = 0;
    auto consume = [&](const std::vector<ingest::ParseOutcome>& outcomes) {
        for (const auto& outcome : outcomes) {
            counts.add(outcome);
            const auto* s = std::get_if<ingest::SampleOutcome>(&outcome);
            if (!s) continue;
            if (last_t && s->sample.t_ms <= *last_t) {
                ++dropped;
                continue;
            }
            last_t = s->sample.t_ms;
            pipeline.push(s->sample);
        }
    };
    try {
        while (auto chunk = channel.pop()) consume(decoder.feed(*chunk));
        consume(decoder.finish());
    } catch (...) {
        channel.close();
        ::shutdown(peer.fd(), SHUT_RDWR);
        reader.join();
        throw;
    }
    reader.join();

    auto report = pipeline.report();
    report.ingest = counts;
    report.dropped_samples = dropped;
    return report;
}

}  // namespace pulsealarm::net

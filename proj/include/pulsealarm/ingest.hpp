#pragma once

// Framed byte-stream transport for samples.
//
// Frame layout (9 bytes):
//   0     sync 0xAA
//   1     seq, modulo 256
//   2..5  t_ms, unsigned big-endian
//   6..7  value, unsigned big-endian, <= 1023
//   8     checksum, XOR of bytes 1..7
//
// No byte stuffing: 0xAA may appear in payloads, the checksum disambiguates.

#include <array>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "pulsealarm/signal.hpp"

namespace pulsealarm::ingest {

inline constexpr std::uint8_t kSync = 0xAA;
inline constexpr std::size_t kFrameSize = 9;

using Frame = std::array<std::uint8_t, kFrameSize>;

Frame encode_frame(std::uint8_t seq, const Sample& sample);

std::uint8_t frame_checksum(std::span<const std::uint8_t> frame) noexcept;

struct SampleOutcome {
    std::uint8_t seq = 0;
    Sample sample;
    friend bool operator==(const SampleOutcome&, const SampleOutcome&) = default;
};
struct Gap {
    std::uint8_t expected_seq = 0;
    std::uint8_t got_seq = 0;
    friend bool operator==(const Gap&, const Gap&) = default;
};
struct CorruptFrame {
    std::uint64_t offset = 0;
    friend bool operator==(const CorruptFrame&, const CorruptFrame&) = default;
};
struct Resync {
    std::uint64_t skipped = 0;
    friend bool operator==(const Resync&, const Resync&) = default;
};

using ParseOutcome = std::variant<SampleOutcome, Gap, CorruptFrame, Resync>;

// Incremental frame decoder. Total over arbitrary input: corruption is
// reported as outcomes and parsing resumes at the next valid frame.
//
// While in sync, a bad frame at the expected position is reported as
// CorruptFrame. Recovery first tries the slot one frame later (in-place
// damage), otherwise hunts byte by byte for a sync byte whose frame verifies.
// Bytes thrown away are reported as one Resync per contiguous run, or at the
// end of a feed call if the hunt is still going.
class Decoder {
public:
    std::vector<ParseOutcome> feed(std::span<const std::uint8_t> bytes);
    // End of stream: decodes what can still be decoded and reports the
    // leftover tail as a Resync. The decoder is reset for a new stream.
    std::vector<ParseOutcome> finish();

    std::uint64_t bytes_consumed() const noexcept { return offset_; }
    std::size_t buffered() const noexcept { return buffer_.size(); }

private:
    enum class Mode { hunting, synced, recovering };

    void emit_frame(std::vector<ParseOutcome>& out);
    void flush_resync(std::vector<ParseOutcome>& out);
    void drop(std::size_t n);

    Mode mode_ = Mode::hunting;
    std::deque<std::uint8_t> buffer_;
    std::uint64_t offset_ = 0;  // stream offset of buffer_.front()
    std::uint64_t skipped_ = 0;
    std::optional<std::uint8_t> last_seq_;
    bool draining_ = false;
};

struct DecodeCounts {
    std::size_t samples = 0;
    std::size_t gaps = 0;
    std::size_t corrupt = 0;
    std::size_t resyncs = 0;
    std::uint64_t skipped_bytes = 0;

    void add(const ParseOutcome& outcome);
};

std::vector<std::uint8_t> encode_stream(std::span<const Sample> samples, std::uint8_t first_seq = 0);

// Picks `count` frame indices to damage out of `frame_count`, never the first
// or last frame and never two neighbours, so that each damaged frame yields
// exactly one CorruptFrame and one Gap. Throws DomainError if they do not fit.
std::vector<std::size_t> choose_corrupt_frames(std::size_t frame_count, std::size_t count, std::uint64_t seed);

// Flips one non-sync byte of the frame with a random nonzero mask.
void corrupt_frame(std::span<std::uint8_t, kFrameSize> frame, std::uint64_t seed);

using ByteSink = std::function<void(std::span<const std::uint8_t>)>;

// Encodes the CSV waveform frame by frame into `sink`. speed > 0 paces delivery
// at real time divided by speed; speed == 0 delivers immediately.
// Throws ParseError for malformed CSV and StreamError for non-increasing t_ms.
std::size_t replay_file(const std::filesystem::path& path, const ByteSink& sink, double speed = 0.0);
std::size_t replay_samples(std::span<const Sample> samples, const ByteSink& sink, double speed = 0.0);

// Bounded FIFO of byte chunks between a producer and one consumer thread.
// push blocks while full; pop blocks while empty and returns nullopt once the
// channel is closed and drained.
class ByteChannel {
public:
    explicit ByteChannel(std::size_t max_chunks = 1024);

    bool push(std::vector<std::uint8_t> chunk);
    std::optional<std::vector<std::uint8_t>> pop();
    void close();

private:
    std::size_t max_chunks_;
    std::mutex mu_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::deque<std::vector<std::uint8_t>> chunks_;
    bool closed_ = false;
};

}  // namespace pulsealarm::ingest

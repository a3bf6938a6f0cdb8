#include "pulsealarm/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <string>
#include <thread>

#include "pulsealarm/errors.hpp"
#include "pulsealarm/waveform.hpp"

namespace pulsealarm::ingest {

namespace {

template <class Bytes>
bool frame_valid_at(const Bytes& buf, std::size_t pos) {
    if (buf.size() < pos + kFrameSize || buf[pos] != kSync) return false;
    std::uint8_t x = 0;
    for (std::size_t i = 1; i < kFrameSize - 1; ++i) x ^= buf[pos + i];
    if (x != buf[pos + kFrameSize - 1]) return false;
    const unsigned value = (static_cast<unsigned>(buf[pos + 6]) << 8) | buf[pos + 7];
    return value <= static_cast<unsigned>(kAdcMax);
}

}  // namespace

std::uint8_t frame_checksum(std::span<const std::uint8_t> frame) noexcept {
    std::uint8_t x = 0;
    for (std::size_t i = 1; i < frame.size() && i < kFrameSize - 1; ++i) x ^= frame[i];
    return x;
}

Frame encode_frame(std::uint8_t seq, const Sample& sample) {
    if (!in_adc_range(sample.value)) throw DomainError("value " + std::to_string(sample.value) + " outside ADC range");
    if (sample.t_ms < 0 || sample.t_ms > 0xFFFF'FFFFLL) throw DomainError("t_ms does not fit in 32 bits");

    const auto t = static_cast<std::uint32_t>(sample.t_ms);
    const auto v = static_cast<std::uint16_t>(sample.value);
    Frame f{kSync,
            seq,
            static_cast<std::uint8_t>(t >> 24),
            static_cast<std::uint8_t>(t >> 16),
            static_cast<std::uint8_t>(t >> 8),
            static_cast<std::uint8_t>(t),
            static_cast<std::uint8_t>(v >> 8),
            static_cast<std::uint8_t>(v),
            0};
    f[8] = frame_checksum(f);
    return f;
}

void Decoder::drop(std::size_t n) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(n));
    offset_ += n;
}

void Decoder::flush_resync(std::vector<ParseOutcome>& out) {
    if (skipped_ == 0) return;
    out.emplace_back(Resync{skipped_});
    skipped_ = 0;
}

void Decoder::emit_frame(std::vector<ParseOutcome>& out) {
    const std::uint8_t seq = buffer_[1];
    const std::int64_t t = (static_cast<std::int64_t>(buffer_[2]) << 24) | (static_cast<std::int64_t>(buffer_[3]) << 16) |
                           (static_cast<std::int64_t>(buffer_[4]) << 8) | buffer_[5];
    const int value = (buffer_[6] << 8) | buffer_[7];
    drop(kFrameSize);

    out.emplace_back(SampleOutcome{seq, {t, value}});
    if (last_seq_ && seq != static_cast<std::uint8_t>(*last_seq_ + 1))
        out.emplace_back(Gap{static_cast<std::uint8_t>(*last_seq_ + 1), seq});
    last_seq_ = seq;
}

std::vector<ParseOutcome> Decoder::feed(std::span<const std::uint8_t> bytes) {
    std::vector<ParseOutcome> out;
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());

    for (bool progress = true; progress;) {
        progress = false;
        switch (mode_) {
            case Mode::hunting: {
                std::size_t junk = 0;
                while (junk < buffer_.size() && buffer_[junk] != kSync) ++junk;
                if (junk > 0) {
                    drop(junk);
                    skipped_ += junk;
                }
                if (buffer_.size() < kFrameSize) break;
                if (frame_valid_at(buffer_, 0)) {
                    flush_resync(out);
                    emit_frame(out);
                    mode_ = Mode::synced;
                } else {
                    drop(1);
                    ++skipped_;
                }
                progress = true;
                break;
            }
            case Mode::synced:
                if (buffer_.size() < kFrameSize) break;
                if (frame_valid_at(buffer_, 0)) {
                    emit_frame(out);
                } else {
                    out.emplace_back(CorruptFrame{offset_});
                    mode_ = Mode::recovering;
                }
                progress = true;
                break;
            case Mode::recovering:
                if (buffer_.size() < 2 * kFrameSize && !draining_) break;
                if (buffer_.size() >= 2 * kFrameSize && frame_valid_at(buffer_, kFrameSize)) {
                    drop(kFrameSize);
                    skipped_ += kFrameSize;
                    flush_resync(out);
                    mode_ = Mode::synced;
                } else {
                    drop(1);
                    ++skipped_;
                    mode_ = Mode::hunting;
                }
                progress = true;
                break;
        }
    }
    if (mode_ == Mode::hunting) flush_resync(out);
    return out;
}

std::vector<ParseOutcome> Decoder::finish() {
    draining_ = true;
    auto out = feed({});
    if (!buffer_.empty()) {
        skipped_ += buffer_.size();
        drop(buffer_.size());
    }
    flush_resync(out);
    *this = Decoder{};
    return out;
}

void DecodeCounts::add(const ParseOutcome& outcome) {
    if (std::holds_alternative<SampleOutcome>(outcome)) {
        ++samples;
    } else if (std::holds_alternative<Gap>(outcome)) {
        ++gaps;
    } else if (std::holds_alternative<CorruptFrame>(outcome)) {
        ++corrupt;
    } else if (const auto* r = std::get_if<Resync>(&outcome)) {
        ++resyncs;
        skipped_bytes += r->skipped;
    }
}

std::vector<std::uint8_t> encode_stream(std::span<const Sample> samples, std::uint8_t first_seq) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(samples.size() * kFrameSize);
    std::uint8_t seq = first_seq;
    for (const auto& s : samples) {
        const auto f = encode_frame(seq++, s);
        bytes.insert(bytes.end(), f.begin(), f.end());
    }
    return bytes;
}

std::vector<std::size_t> choose_corrupt_frames(std::size_t frame_count, std::size_t count, std::uint64_t seed) {
    if (count == 0) return {};
    // Candidates 1..frame_count-2 with pairwise spacing >= 2.
    if (frame_count < 3 || count > (frame_count - 1) / 2)
        throw DomainError("cannot place " + std::to_string(count) + " isolated corrupt frames in " +
                          std::to_string(frame_count));

    // Choose `count` slots among frame_count-2-(count-1) positions, then spread
    // them apart by one so no two are adjacent.
    const std::size_t slots = frame_count - 2 - (count - 1);
    std::vector<std::size_t> all(slots);
    for (std::size_t i = 0; i < slots; ++i) all[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(count);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < count; ++i) all[i] += 1 + i;
    return all;
}

void corrupt_frame(std::span<std::uint8_t, kFrameSize> frame, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto pos = std::uniform_int_distribution<std::size_t>(1, kFrameSize - 1)(rng);
    const auto mask = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(1, 255)(rng));
    frame[pos] ^= mask;
}

std::size_t replay_samples(std::span<const Sample> samples, const ByteSink& sink, double speed) {
    check_monotone(samples);
    if (speed < 0.0) throw DomainError("replay speed must be non-negative");

    const auto start = std::chrono::steady_clock::now();
    std::uint8_t seq = 0;
    for (const auto& s : samples) {
        if (speed > 0.0) {
            const auto due = std::chrono::duration<double, std::milli>(
                static_cast<double>(s.t_ms - samples.front().t_ms) / speed);
            std::this_thread::sleep_until(start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(due));
        }
        const auto f = encode_frame(seq++, s);
        sink(f);
    }
    return samples.size();
}

std::size_t replay_file(const std::filesystem::path& path, const ByteSink& sink, double speed) {
    const auto samples = read_waveform(path);
    return replay_samples(samples, sink, speed);
}

ByteChannel::ByteChannel(std::size_t max_chunks) : max_chunks_(max_chunks == 0 ? 1 : max_chunks) {}

bool ByteChannel::push(std::vector<std::uint8_t> chunk) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [this] { return closed_ || chunks_.size() < max_chunks_; });
    if (closed_) return false;
    chunks_.push_back(std::move(chunk));
    lk.unlock();
    not_empty_.notify_one();
    return true;
}

std::optional<std::vector<std::uint8_t>> ByteChannel::pop() {
    std::unique_lock lk(mu_);
    not_empty_.wait(lk, [this] { return closed_ || !chunks_.empty(); });
    if (chunks_.empty()) return std::nullopt;
    auto chunk = std::move(chunks_.front());
    chunks_.pop_front();
    lk.unlock();
    not_full_.notify_one();
    return chunk;
}

void ByteChannel::close() {
    {
        std::lock_guard lk(mu_);
        closed_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
}

}  // namespace pulsealarm::ingest

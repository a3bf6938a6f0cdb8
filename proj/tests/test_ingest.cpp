#include <doctest.h>

#include <random>
#include <thread>

#include "pulsealarm/errors.hpp"
#include "pulsealarm/ingest.hpp"
#include "pulsealarm/waveform.hpp"

using namespace pulsealarm;
using namespace pulsealarm::ingest;

namespace {

std::vector<Sample> samples_only(const std::vector<ParseOutcome>& outcomes) {
    std::vector<Sample> out;
    for (const auto& o : outcomes) {
        if (const auto* s = std::get_if<SampleOutcome>(&o)) out.push_back(s->sample);
    }
    return out;
}

}  // namespace

TEST_CASE("encode_frame byte layout") {
    CHECK(encode_frame(0, {0, 0}) == Frame{0xAA, 0, 0, 0, 0, 0, 0, 0, 0});
    CHECK(encode_frame(1, {1, 1}) == Frame{0xAA, 0x01, 0, 0, 0, 0x01, 0, 0x01, 0x01});
    CHECK(encode_frame(0x7F, {0x01020304, 0x3FF}) == Frame{0xAA, 0x7F, 0x01, 0x02, 0x03, 0x04, 0x03, 0xFF,
                                                           static_cast<std::uint8_t>(0x7F ^ 1 ^ 2 ^ 3 ^ 4 ^ 3 ^ 0xFF)});
    CHECK_THROWS_AS(encode_frame(0, {0, 1024}), DomainError);
    CHECK_THROWS_AS(encode_frame(0, {0x1'0000'0000LL, 0}), DomainError);
}

TEST_CASE("decoder on clean and damaged streams") {
    const std::vector<Sample> s{{0, 10}, {10, 20}, {20, 30}};
    auto bytes = encode_stream(s);

    SUBCASE("three valid frames") {
        Decoder d;
        const auto out = d.feed(bytes);
        REQUIRE(out.size() == 3);
        CHECK(out[0] == ParseOutcome{SampleOutcome{0, s[0]}});
        CHECK(out[1] == ParseOutcome{SampleOutcome{1, s[1]}});
        CHECK(out[2] == ParseOutcome{SampleOutcome{2, s[2]}});
    }
    SUBCASE("middle checksum flipped") {
        bytes[17] ^= 0xFF;
        Decoder d;
        const auto out = d.feed(bytes);
        const std::vector<ParseOutcome> expected{SampleOutcome{0, s[0]}, CorruptFrame{9}, Resync{9},
                                                 SampleOutcome{2, s[2]}, Gap{1, 2}};
        CHECK(out == expected);
    }
    SUBCASE("garbage without a sync byte") {
        std::vector<std::uint8_t> junk(100);
        for (std::size_t i = 0; i < junk.size(); ++i) junk[i] = static_cast<std::uint8_t>(i % 0xAA);
        Decoder d;
        const auto out = d.feed(junk);
        REQUIRE(out.size() == 1);
        CHECK(out[0] == ParseOutcome{Resync{100}});
    }
    SUBCASE("byte-at-a-time delivery") {
        Decoder d;
        std::vector<ParseOutcome> out;
        for (auto b : bytes) {
            auto part = d.feed(std::span(&b, 1));
            out.insert(out.end(), part.begin(), part.end());
        }
        CHECK(samples_only(out) == s);
        CHECK(out.size() == 3);
    }
    SUBCASE("leading garbage is skipped") {
        std::vector<std::uint8_t> stream{1, 2, 3};
        stream.insert(stream.end(), bytes.begin(), bytes.end());
        Decoder d;
        const auto out = d.feed(stream);
        REQUIRE(out.size() == 4);
        CHECK(out[0] == ParseOutcome{Resync{3}});
        CHECK(samples_only(out) == s);
    }
}

TEST_CASE("finish reports the leftover tail") {
    const auto bytes = encode_stream(std::vector<Sample>{{0, 1}, {10, 2}});
    Decoder d;
    auto out = d.feed(std::span(bytes).first(13));
    CHECK(out.size() == 1);
    out = d.finish();
    REQUIRE(out.size() == 1);
    CHECK(out[0] == ParseOutcome{Resync{4}});
    CHECK(d.buffered() == 0);
    CHECK(d.finish().empty());
}

TEST_CASE("round trip with sequence wrap-around") {
    std::mt19937_64 rng(1);
    std::vector<Sample> s;
    std::int64_t t = 0;
    for (int i = 0; i < 1000; ++i) s.push_back({t += std::uniform_int_distribution<int>(1, 50)(rng),
                                                std::uniform_int_distribution<int>(0, 1023)(rng)});
    const auto bytes = encode_stream(s, 200);
    Decoder d;
    const auto out = d.feed(bytes);
    CHECK(out.size() == s.size());
    CHECK(samples_only(out) == s);
}

TEST_CASE("recovery: uncorrupted frames survive injected junk between frames") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Sample> s;
        for (int i = 0; i < 60; ++i) s.push_back({i * 10, std::uniform_int_distribution<int>(0, 1023)(rng)});
        std::vector<std::uint8_t> stream;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const int junk = std::uniform_int_distribution<int>(0, 3)(rng) == 0
                                 ? std::uniform_int_distribution<int>(1, 5)(rng)
                                 : 0;
            for (int k = 0; k < junk; ++k) {
                std::uint8_t b;
                do b = static_cast<std::uint8_t>(rng()); while (b == kSync);
                stream.push_back(b);
            }
            const auto f = encode_frame(static_cast<std::uint8_t>(i), s[i]);
            stream.insert(stream.end(), f.begin(), f.end());
        }
        Decoder d;
        auto out = d.feed(stream);
        for (auto& o : d.finish()) out.push_back(o);
        CHECK(samples_only(out) == s);
    }
}

TEST_CASE("in-place corruption is counted exactly") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Sample> s;
        for (int i = 0; i < 500; ++i) s.push_back({i * 10, std::uniform_int_distribution<int>(0, 1023)(rng)});
        auto bytes = encode_stream(s);
        const std::size_t count = std::uniform_int_distribution<std::size_t>(0, 40)(rng);
        const auto damaged = choose_corrupt_frames(s.size(), count, rng());
        REQUIRE(damaged.size() == count);
        for (auto idx : damaged) {
            corrupt_frame(std::span<std::uint8_t, kFrameSize>(bytes.data() + idx * kFrameSize, kFrameSize), rng());
        }
        Decoder d;
        DecodeCounts c;
        for (const auto& o : d.feed(bytes)) c.add(o);
        CHECK(c.corrupt == count);
        CHECK(c.gaps == count);
        CHECK(c.samples == s.size() - count);
    }
    CHECK_THROWS_AS(choose_corrupt_frames(10, 5, 1), DomainError);
}

TEST_CASE("decoder never fails on random bytes") {
    std::mt19937_64 rng(12);
    Decoder d;
    std::size_t consumed = 0;
    for (int chunk = 0; chunk < 200; ++chunk) {
        std::vector<std::uint8_t> bytes(std::uniform_int_distribution<int>(0, 700)(rng));
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
        consumed += bytes.size();
        CHECK_NOTHROW(d.feed(bytes));
    }
    CHECK(d.bytes_consumed() + d.buffered() == consumed);
}

TEST_CASE("replay") {
    WaveformSpec spec;
    const auto wave = synthesize(spec);
    const auto path = std::filesystem::temp_directory_path() / "pulsealarm_replay.csv";
    write_waveform(wave.samples, path);

    std::vector<std::uint8_t> sent;
    const ByteSink sink = [&](std::span<const std::uint8_t> b) { sent.insert(sent.end(), b.begin(), b.end()); };

    SUBCASE("1000 samples make 9000 bytes that decode back") {
        CHECK(replay_file(path, sink) == 1000);
        CHECK(sent.size() == 9000);
        CHECK(sent == encode_stream(wave.samples));
        Decoder d;
        DecodeCounts c;
        for (const auto& o : d.feed(sent)) c.add(o);
        CHECK(c.samples == 1000);
        CHECK(c.gaps == 0);
    }
    SUBCASE("pacing changes timing, not bytes") {
        const auto first = std::vector<Sample>(wave.samples.begin(), wave.samples.begin() + 20);
        const auto start = std::chrono::steady_clock::now();
        replay_samples(first, sink, 10.0);  // 190 ms of signal at 10x
        const auto elapsed = std::chrono::steady_clock::now() - start;
        CHECK(elapsed >= std::chrono::milliseconds(15));
        CHECK(sent == encode_stream(first));
    }
    SUBCASE("non-monotone input is refused before anything is sent") {
        std::vector<Sample> bad{{0, 1}, {10, 1}, {5, 1}};
        write_waveform(bad, path);
        CHECK_THROWS_AS(replay_file(path, sink), StreamError);
        CHECK(sent.empty());
    }
    std::filesystem::remove(path);
}

TEST_CASE("ByteChannel preserves FIFO order across threads") {
    ByteChannel ch(4);
    std::thread producer([&] {
        for (int i = 0; i < 1000; ++i) ch.push({static_cast<std::uint8_t>(i & 0xFF), static_cast<std::uint8_t>(i >> 8)});
        ch.close();
    });
    int expected = 0;
    while (auto chunk = ch.pop()) {
        CHECK(((*chunk)[0] | ((*chunk)[1] << 8)) == expected);
        ++expected;
    }
    producer.join();
    CHECK(expected == 1000);
    CHECK_FALSE(ch.push({1}));
}

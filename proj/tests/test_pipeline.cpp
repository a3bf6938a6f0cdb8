#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "pulsealarm/commands.hpp"
#include "pulsealarm/config.hpp"
#include "pulsealarm/errors.hpp"
#include "pulsealarm/ingest.hpp"
#include "pulsealarm/net.hpp"
#include "pulsealarm/pipeline.hpp"

using namespace pulsealarm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("pulsealarm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("empty object gives defaults") {
        const auto c = parse_config("{}");
        CHECK(c.profile.age_years == 20);
        CHECK(c.schmitt.upper_threshold == 550);
        CHECK(c.required_streak == 3);
        CHECK(c.band_mode == BandMode::fixed);
    }
    SUBCASE("full config") {
        const auto c = parse_config(R"({
            "profile": {"age_years": 40, "resting_bpm": 70},
            "engine": {"band_mode": "AGE_DERIVED", "required_streak": 4},
            "waveform": {"duration_ms": 5000, "heart_rate_bpm": [[0, 60], [2000, 120]]},
            "alarm_time_ms": 1000, "expected_phase": "RINGING", "seed": 9})");
        CHECK(c.profile.age_years == 40);
        CHECK(c.band_mode == BandMode::age_derived);
        CHECK(c.required_streak == 4);
        REQUIRE(c.waveform);
        CHECK(c.waveform->schedule.size() == 2);
        CHECK(c.expected_phase == Phase::ringing);
    }
    SUBCASE("rejections") {
        for (const char* text : {
                 "[]",
                 "{\"bogus\": 1}",
                 "{\"profile\": {\"age\": 20}}",
                 "{\"profile\": {\"age_years\": \"20\"}}",
                 "{\"smoothing_window\": -1}",
                 "{\"engine\": {\"band_mode\": \"LOOSE\"}}",
                 "{\"waveform\": {}, \"input\": \"x.csv\"}",
                 "{\"scenario\": {}, \"alarm_time_ms\": 5}",
                 "{\"waveform\": {\"heart_rate_bpm\": \"fast\"}}",
             }) {
            INFO(text);
            CHECK_THROWS_AS(parse_config(text), ConfigError);
        }
        CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    }
    SUBCASE("waveform requires alarm time and expectation") {
        const auto c = parse_config(R"({"waveform": {"duration_ms": 2000}})");
        CHECK_THROWS_AS(resolve_run(c), ConfigError);
    }
    SUBCASE("error message names the key") {
        try {
            parse_config(R"({"schmitt": {"refractory_ms": 1.5}})");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("schmitt.refractory_ms") != std::string::npos);
        }
    }
}

TEST_CASE("pipeline on a constant-rate waveform") {
    WaveformSpec spec;
    spec.duration_ms = 30'000;
    spec.sample_rate_hz = 1000;
    spec.schedule = {{0, 120.0}};
    spec.pulse_width_ms = 200;
    PipelineConfig pc;
    pc.alarm_time_ms = 5'000;
    const auto report = run_pipeline(synthesize(spec).samples, pc);
    CHECK(report.sample_count == 30'000);
    CHECK(report.beat_count == 60);
    CHECK(report.final_phase == Phase::stopped);
    REQUIRE(report.transitions.size() == 2);
    CHECK(report.transitions[0].from == Phase::armed);
    CHECK(report.transitions[0].to == Phase::ringing);
    CHECK(report.transitions[0].t_ms == 5'000);
    CHECK(report.transitions[1].to == Phase::stopped);
    CHECK(report.counts.rejected_low + report.counts.rejected_high == 0);
    for (const auto& r : report.readings) CHECK(r.bpm == doctest::Approx(120.0));
}

TEST_CASE("cmd_run") {
    TempDir dir;
    SUBCASE("default scenario stops") {
        std::ostringstream out;
        const auto report = dir.path / "r.jsonl";
        CommandOptions o;
        o.out = report;
        CHECK(cmd_run(o, out) == kExitOk);
        const auto text = slurp(report);
        CHECK(text.find("\"to\":\"STOPPED\"") != std::string::npos);
        CHECK(out.str().find("final phase STOPPED") != std::string::npos);
    }
    SUBCASE("exercise at 95 bpm for ten minutes keeps ringing") {
        const auto cfg = dir.write("c.json", R"({"scenario": {"exercise_bpm": 95, "exercise_ms": 600000},
                                                  "output": ")" + (dir.path / "r.jsonl").string() + "\"}");
        CommandOptions o;
        o.config = cfg;
        std::ostringstream out;
        // Scenario expects RINGING, so the run succeeds.
        CHECK(cmd_run(o, out) == kExitOk);
        const auto text = slurp(dir.path / "r.jsonl");
        CHECK(text.find("STOPPED") == std::string::npos);
        CHECK(text.find("\"in_band\":0") != std::string::npos);
    }
    SUBCASE("sleeping rate only stays ringing") {
        const auto csv = dir.path / "sleep.csv";
        WaveformSpec spec;
        spec.duration_ms = 60'000;
        spec.schedule = {{0, 82.0}};
        write_waveform(synthesize(spec).samples, csv);
        const auto cfg = dir.write("c.json", R"({"input": ")" + csv.string() +
                                                 R"(", "alarm_time_ms": 10000, "expected_phase": "STOPPED"})");
        CommandOptions o;
        o.config = cfg;
        o.out = dir.path / "r.jsonl";
        std::ostringstream out;
        CHECK(cmd_run(o, out) == kExitUnexpectedPhase);
        CHECK(out.str().find("final phase RINGING") != std::string::npos);
    }
    SUBCASE("bad config and missing input") {
        CommandOptions o;
        o.config = dir.write("bad.json", "{\"profile\": {\"age_years\": 0}}");
        std::ostringstream out;
        CHECK(cmd_run(o, out) == kExitConfig);
        o.config = dir.path / "absent.json";
        CHECK(cmd_run(o, out) == kExitIo);
        o.config = dir.write("in.json", R"({"input": "/nonexistent.csv", "alarm_time_ms": 1, "expected_phase": "IDLE"})");
        CHECK(cmd_run(o, out) == kExitIo);
    }
}

TEST_CASE("cmd_synth") {
    TempDir dir;
    std::ostringstream out;
    CommandOptions o;
    o.seed = 5;
    o.config = dir.write("c.json", R"({"waveform": {"noise_stddev": 12}, "alarm_time_ms": 0, "expected_phase": "RINGING"})");
    o.out = dir.path / "a.csv";
    REQUIRE(cmd_synth(o, out) == kExitOk);
    o.out = dir.path / "b.csv";
    REQUIRE(cmd_synth(o, out) == kExitOk);
    const auto a = slurp(dir.path / "a.csv");
    CHECK(a == slurp(dir.path / "b.csv"));
    CHECK(std::count(a.begin(), a.end(), '\n') == 1001);
    CHECK(out.str().find("10 beats") != std::string::npos);

    o.seed = 6;
    o.out = dir.path / "c.csv";
    REQUIRE(cmd_synth(o, out) == kExitOk);
    CHECK(a != slurp(dir.path / "c.csv"));

    o.config = dir.write("bad.json", R"({"waveform": {"pulse_amplitude": 900}, "alarm_time_ms": 0, "expected_phase": "IDLE"})");
    CHECK(cmd_synth(o, out) == kExitConfig);
    o.config.reset();
    o.out.reset();
    CHECK(cmd_synth(o, out) == kExitConfig);
}

TEST_CASE("cmd_bench") {
    TempDir dir;
    const auto cfg = dir.write("c.json", R"({"bench": {"duration_ms": 20000, "stray_counts": [0, 10],
                                              "noise_levels": [0, 80], "seeds_per_cell": 2}})");
    CommandOptions o;
    o.config = cfg;
    o.out = dir.path / "bench.csv";
    std::ostringstream out;
    REQUIRE(cmd_bench(o, out) == kExitOk);
    const auto csv = slurp(dir.path / "bench.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);  // header + 4 cells x 2 detectors

    BenchConfig bc;
    bc.duration_ms = 20'000;
    bc.stray_counts = {10};
    bc.noise_levels = {0.0};
    bc.seeds_per_cell = 3;
    const auto result = run_bench(bc);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].schmitt.false_beats == 0);
    CHECK(result.rows[0].schmitt.missed == 0);
    CHECK(result.rows[0].naive.false_beats == 30);
}

TEST_CASE("serve and send over loopback") {
    TempDir dir;
    WaveformSpec spec;
    const auto csv = dir.path / "w.csv";
    write_waveform(synthesize(spec).samples, csv);
    const auto cfg = dir.write("c.json", R"({"alarm_time_ms": 2000, "expected_phase": "RINGING"})");

    auto run_pair = [&](std::size_t corrupt) {
        std::promise<std::uint16_t> port;
        auto port_future = port.get_future();
        std::ostringstream serve_out;
        int serve_rc = -1;
        CommandOptions so;
        so.config = cfg;
        so.port = 0;
        so.out = dir.path / "serve.jsonl";
        std::thread server([&] { serve_rc = cmd_serve(so, serve_out, [&](std::uint16_t p) { port.set_value(p); }); });

        CommandOptions co;
        co.file = csv;
        co.port = port_future.get();
        co.corrupt = corrupt;
        co.seed = 3;
        std::ostringstream send_out;
        const int send_rc = cmd_send(co, send_out);
        server.join();
        return std::tuple{serve_rc, send_rc, slurp(dir.path / "serve.jsonl")};
    };

    SUBCASE("clean stream") {
        const auto [serve_rc, send_rc, report] = run_pair(0);
        CHECK(send_rc == kExitOk);
        CHECK(serve_rc == kExitOk);
        CHECK(report.find("\"frames\":1000") != std::string::npos);
        CHECK(report.find("\"gaps\":0") != std::string::npos);
    }
    SUBCASE("injected corruption is counted") {
        const auto [serve_rc, send_rc, report] = run_pair(7);
        CHECK(send_rc == kExitOk);
        CHECK(serve_rc == kExitOk);
        CHECK(report.find("\"frames\":993") != std::string::npos);
        CHECK(report.find("\"corrupt_frames\":7") != std::string::npos);
        CHECK(report.find("\"gaps\":7") != std::string::npos);
    }
    SUBCASE("connection refused") {
        std::uint16_t port = 0;
        {
            const net::Listener probe(0);
            port = probe.port();
        }
        CommandOptions co;
        co.file = csv;
        co.port = port;
        std::ostringstream out;
        CHECK(cmd_send(co, out) == kExitIo);
    }
    SUBCASE("partial stream closed mid-frame") {
        std::promise<std::uint16_t> port;
        auto port_future = port.get_future();
        std::ostringstream serve_out;
        int serve_rc = -1;
        CommandOptions so;
        so.config = cfg;
        so.port = 0;
        so.out = dir.path / "serve.jsonl";
        std::thread server([&] { serve_rc = cmd_serve(so, serve_out, [&](std::uint16_t p) { port.set_value(p); }); });
        {
            const auto sock = net::connect_to("127.0.0.1", port_future.get());
            auto bytes = ingest::encode_stream(synthesize(spec).samples);
            bytes.resize(100 * ingest::kFrameSize + 4);
            sock.send_all(bytes);
        }
        server.join();
        CHECK(serve_rc == kExitUnexpectedPhase);  // 1 s of signal never reaches the alarm
        CHECK(slurp(dir.path / "serve.jsonl").find("\"frames\":100,") != std::string::npos);
    }
}

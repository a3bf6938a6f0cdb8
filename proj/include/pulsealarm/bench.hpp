#pragma once

// Schmitt vs single-threshold detection over a stray-pulse / noise sweep.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pulsealarm/signal.hpp"
#include "pulsealarm/waveform.hpp"

namespace pulsealarm {

struct BeatScore {
    std::size_t truth = 0;     // onsets whose whole pulse lies inside the record
    std::size_t detected = 0;
    std::size_t matched = 0;
    std::size_t false_beats = 0;
    std::size_t missed = 0;

    BeatScore& operator+=(const BeatScore& o);
};

// A detection matches the earliest unmatched onset tb with
// tb <= t <= tb + pulse_width + tolerance. Detections belonging to pulses cut
// off by the end of the record are neither false nor matched.
BeatScore score_beats(std::span<const BeatEvent> beats, const GroundTruth& truth, std::int64_t pulse_width_ms,
                      std::int64_t record_end_ms, double tolerance_ms);

struct BenchConfig {
    double bpm = 60.0;
    std::int64_t duration_ms = 60'000;
    int sample_rate_hz = 100;
    std::vector<std::size_t> stray_counts{0, 10, 20};
    std::vector<double> noise_levels{0.0, 5.0, 10.0, 20.0, 40.0, 80.0};
    std::size_t seeds_per_cell = 5;
    int stray_peak = 510;
    std::int64_t stray_width_ms = 60;
    int naive_threshold = 490;
    SchmittConfig schmitt;
    std::uint64_t seed = 1;

    void validate() const;
};

struct BenchRow {
    std::size_t stray_count = 0;
    double noise_stddev = 0.0;
    BeatScore naive;
    BeatScore schmitt;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    // Smallest swept noise level at which the Schmitt detector first reports
    // a false beat, if any.
    std::optional<double> schmitt_breaking_noise;
};

BenchResult run_bench(const BenchConfig& config);

void write_bench_csv(const BenchResult& result, std::ostream& out);
void write_bench_table(const BenchResult& result, const BenchConfig& config, std::ostream& out);

}  // namespace pulsealarm

#pragma once

// Synthetic pulse waveforms with known beat times, CSV I/O, and end-to-end
// wake scenarios built on top of them.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pulsealarm/alarm.hpp"
#include "pulsealarm/physiology.hpp"
#include "pulsealarm/signal.hpp"

namespace pulsealarm {

struct RateSegment {
    std::int64_t start_ms = 0;
    double bpm = 60.0;
};

struct StrayPulse {
    std::int64_t t_ms = 0;
    int peak = 500;  // absolute ADC level reached when riding on the baseline
    std::int64_t width_ms = 60;

    friend bool operator==(const StrayPulse&, const StrayPulse&) = default;
};

struct WaveformSpec {
    std::int64_t duration_ms = 10'000;
    int sample_rate_hz = 100;
    std::vector<RateSegment> schedule{{0, 60.0}};
    int pulse_amplitude = 400;
    int baseline = 400;
    std::int64_t pulse_width_ms = 200;
    double noise_stddev = 0.0;
    double wander_amplitude = 0.0;
    std::int64_t wander_period_ms = 10'000;
    std::vector<StrayPulse> stray_pulses;
    std::uint64_t rng_seed = 1;

    // Throws SpecError naming the first offending field.
    void validate() const;

    // Sample timestamp spacing; exact only when the rate divides 1000.
    double sample_period_ms() const noexcept { return 1000.0 / sample_rate_hz; }
};

struct GroundTruth {
    std::vector<double> beat_times_ms;  // pulse onsets
    std::vector<RateSegment> segments;
};

struct Waveform {
    std::vector<Sample> samples;
    GroundTruth truth;
};

// Raised-cosine pulses of pulse_width_ms at each beat onset on top of the
// baseline, plus sinusoidal wander, Gaussian noise and the stray pulses.
// Rounded and clamped to the ADC range. Deterministic for a given rng_seed.
Waveform synthesize(const WaveformSpec& spec);

// `count` stray pulses at random times in the quiet stretches between beats
// (clear of every pulse and of each other). Times are whole sample periods.
std::vector<StrayPulse> scatter_stray_pulses(const WaveformSpec& spec, std::size_t count, int peak,
                                             std::int64_t width_ms, std::uint64_t seed);

// Delay from pulse onset to the point where a noise-free pulse on the baseline
// first reaches `level`; nullopt if it never does.
std::optional<double> pulse_crossing_offset_ms(const WaveformSpec& spec, int level);

void write_waveform(std::span<const Sample> samples, std::ostream& out);
void write_waveform(std::span<const Sample> samples, const std::filesystem::path& path);
// Parses `t_ms,value` CSV; ParseError carries the 1-based line number.
std::vector<Sample> read_waveform(std::istream& in);
std::vector<Sample> read_waveform(const std::filesystem::path& path);

// Throws StreamError at the first non-increasing timestamp.
void check_monotone(std::span<const Sample> samples);

struct ScenarioOverrides {
    std::int64_t sleep_ms = 30'000;          // sleep-rate signal before the alarm
    std::int64_t reaction_ms = 10'000;       // alarm onset to start of exercise
    std::int64_t exercise_ms = 60'000;
    std::optional<double> exercise_bpm;      // default: middle of the satisfaction band
    BandMode band_mode = BandMode::fixed;
    int required_streak = 3;
    std::size_t smoothing_window = kDefaultSmoothingWindow;
    int sample_rate_hz = 1000;
    double noise_stddev = 0.0;
    std::uint64_t rng_seed = 1;
};

struct ExpectedTransition {
    Phase from = Phase::idle;
    Phase to = Phase::idle;
    std::int64_t earliest_ms = 0;
    std::int64_t latest_ms = 0;
};

struct WakeScenario {
    WaveformSpec spec;
    std::int64_t alarm_time_ms = 0;
    double sleep_bpm = 0.0;
    double exercise_bpm = 0.0;
    std::int64_t exercise_start_ms = 0;
    BpmBand satisfaction_band;
    std::vector<ExpectedTransition> expected;
    Phase expected_final_phase = Phase::armed;
};

// Sleep segment at the rounded midpoint of sleep_rate_range(resting), alarm at
// the end of it, then an exercise segment after the reaction delay.
// Throws ScenarioError when the sleeping rate would already satisfy the band.
WakeScenario make_wake_scenario(const UserProfile& profile, const ScenarioOverrides& overrides = {});

}  // namespace pulsealarm

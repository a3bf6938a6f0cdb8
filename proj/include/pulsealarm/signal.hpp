#pragma once

// Beat detection on a sampled pulse waveform: software Schmitt trigger with a
// refractory guard, a single-threshold baseline detector, and BPM estimation.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace pulsealarm {

inline constexpr int kAdcMin = 0;
inline constexpr int kAdcMax = 1023;

inline constexpr double kPlausibleMinBpm = 23.0;
inline constexpr double kPlausibleMaxBpm = 200.0;

struct Sample {
    std::int64_t t_ms = 0;
    int value = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

bool in_adc_range(int value) noexcept;

struct SchmittConfig {
    int upper_threshold = 550;
    int lower_threshold = 470;
    std::int64_t refractory_ms = 250;

    // Throws DomainError when lower >= upper or refractory_ms <= 0.
    void validate() const;
};

enum class Level { low, high };

struct SchmittState {
    Level level = Level::low;
    std::optional<std::int64_t> last_beat_t_ms;

    friend bool operator==(const SchmittState&, const SchmittState&) = default;
};

struct SchmittStep {
    SchmittState state;
    bool rising_edge = false;
};

// One sample through the trigger. Pure: the returned state is the only memory.
SchmittStep schmitt_step(const SchmittState& state, const SchmittConfig& config, const Sample& sample) noexcept;

struct BeatEvent {
    std::int64_t t_ms = 0;
    std::optional<std::int64_t> ibi_ms;

    friend bool operator==(const BeatEvent&, const BeatEvent&) = default;
};

// Streaming wrapper around schmitt_step. Enforces strictly increasing
// timestamps and valid ADC values; violations throw StreamError.
class BeatDetector {
public:
    explicit BeatDetector(SchmittConfig config = {});

    std::optional<BeatEvent> push(const Sample& sample);

    const SchmittState& state() const noexcept { return state_; }
    const SchmittConfig& config() const noexcept { return config_; }
    std::size_t samples_seen() const noexcept { return index_; }

private:
    SchmittConfig config_;
    SchmittState state_;
    std::optional<std::int64_t> last_t_ms_;
    std::size_t index_ = 0;
};

std::vector<BeatEvent> detect_beats(std::span<const Sample> samples, const SchmittConfig& config);

// Single-threshold detector without hysteresis or refractory period. An edge
// fires whenever the value goes from below the threshold to at or above it.
std::vector<BeatEvent> naive_detect_beats(std::span<const Sample> samples, int threshold);

enum class BpmStatus { valid, rejected_low, rejected_high };

std::string_view to_string(BpmStatus status) noexcept;

struct BpmEstimate {
    std::int64_t t_ms = 0;
    double bpm = 0.0;
    BpmStatus status = BpmStatus::valid;

    friend bool operator==(const BpmEstimate&, const BpmEstimate&) = default;
};

double bpm_from_ibi(double ibi_ms);

// Readings outside [23, 200] bpm are rejected; the bounds themselves are valid.
BpmEstimate plausibility_filter(double bpm, std::int64_t t_ms);

inline constexpr std::size_t kDefaultSmoothingWindow = 5;

// Median of the last min(window, available) instantaneous BPM values, filtered.
// Returns nothing until two beats (one interval) have been seen.
std::optional<BpmEstimate> estimate_bpm(std::span<const BeatEvent> beats,
                                        std::size_t smoothing_window = kDefaultSmoothingWindow);

// Incremental form of estimate_bpm that only keeps the last `window` intervals.
class BpmEstimator {
public:
    explicit BpmEstimator(std::size_t smoothing_window = kDefaultSmoothingWindow);

    std::optional<BpmEstimate> push(const BeatEvent& beat);

private:
    std::size_t window_;
    std::deque<double> recent_bpm_;
};

}  // namespace pulsealarm

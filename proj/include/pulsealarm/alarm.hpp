#pragma once

// Alarm state machine: armed on a schedule, latched by the alarm line, rings
// until a run of valid in-band heart-rate readings (or an explicit disarm).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pulsealarm/physiology.hpp"
#include "pulsealarm/signal.hpp"

namespace pulsealarm {

enum class Phase { idle, armed, ringing, stopped };
enum class Latch { reset, set };

std::string_view to_string(Phase phase) noexcept;
std::optional<Phase> phase_from_string(std::string_view text) noexcept;

struct EngineConfig {
    BpmBand satisfaction_band = kFixedSatisfactionBand;
    int required_streak = 3;
    int latch_set_threshold = 512;

    void validate() const;
};

struct AlarmEngineState {
    Phase phase = Phase::idle;
    std::optional<std::int64_t> alarm_time_ms;
    Latch latch = Latch::reset;
    int in_band_streak = 0;
    EngineConfig config;
    // Ordering guard for incoming events.
    std::optional<std::int64_t> last_event_t_ms;
    std::size_t events_processed = 0;

    bool buzzer_on() const noexcept { return phase == Phase::ringing; }
};

AlarmEngineState make_engine(const EngineConfig& config);

// Millisecond offset of a wall-clock time of day on the simulated clock.
constexpr std::int64_t clock_ms(int hours, int minutes, int seconds = 0) {
    return ((static_cast<std::int64_t>(hours) * 60 + minutes) * 60 + seconds) * 1000;
}

struct ClockTick {
    std::int64_t t_ms = 0;
};
struct AlarmLineLevel {
    std::int64_t t_ms = 0;
    int level = 0;
};
struct BpmReading {
    BpmEstimate estimate;
};
struct Disarm {
    std::int64_t t_ms = 0;
};

using EngineEvent = std::variant<ClockTick, AlarmLineLevel, BpmReading, Disarm>;

std::int64_t event_time(const EngineEvent& event) noexcept;
std::string_view event_kind(const EngineEvent& event) noexcept;

struct BuzzerOn {
    friend bool operator==(const BuzzerOn&, const BuzzerOn&) = default;
};
struct BuzzerOff {
    friend bool operator==(const BuzzerOff&, const BuzzerOff&) = default;
};
struct LogTransition {
    std::int64_t t_ms = 0;
    Phase from = Phase::idle;
    Phase to = Phase::idle;
    std::string trigger;

    friend bool operator==(const LogTransition&, const LogTransition&) = default;
};

using EngineAction = std::variant<BuzzerOn, BuzzerOff, LogTransition>;

// IDLE or STOPPED (or a still-armed schedule) -> ARMED at the given time.
// Throws StateError while ringing: the only way out is exercise or disarm.
AlarmEngineState set_alarm(AlarmEngineState state, std::int64_t alarm_time_ms);

// Bistable latch: a level at or above the set threshold sets it for good.
// Only set_alarm and Disarm reset it. Ignored outside ARMED/RINGING.
AlarmEngineState latch_alarm_line(AlarmEngineState state, int analog_level);

struct StepResult {
    AlarmEngineState state;
    std::vector<EngineAction> actions;
};

// Throws StreamError if the event is older than the previous one.
StepResult step(const AlarmEngineState& state, const EngineEvent& event);

struct EngineRun {
    AlarmEngineState final_state;
    std::vector<LogTransition> transitions;
    std::vector<EngineAction> actions;
};

// Folds step over the events; a failing event is reported by its index.
EngineRun run_engine(AlarmEngineState initial, std::span<const EngineEvent> events);

// One line of JSON, no trailing newline: {"t_ms":..,"from":..,"to":..,"trigger":..}
std::string to_json_line(const LogTransition& transition);

}  // namespace pulsealarm

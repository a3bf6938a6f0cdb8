#include "pulsealarm/alarm.hpp"

#include <json.hpp>

#include "pulsealarm/errors.hpp"

namespace pulsealarm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void transition(StepResult& result, Phase to, std::int64_t t_ms, std::string_view trigger) {
    const Phase from = result.state.phase;
    if (from == to) return;
    result.state.phase = to;
    result.actions.emplace_back(LogTransition{t_ms, from, to, std::string(trigger)});
    if (to == Phase::ringing) result.actions.emplace_back(BuzzerOn{});
    if (from == Phase::ringing) result.actions.emplace_back(BuzzerOff{});
}

void start_ringing(StepResult& result, std::int64_t t_ms, std::string_view trigger) {
    result.state.latch = Latch::set;
    result.state.in_band_streak = 0;
    transition(result, Phase::ringing, t_ms, trigger);
}

}  // namespace

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::idle: return "IDLE";
        case Phase::armed: return "ARMED";
        case Phase::ringing: return "RINGING";
        case Phase::stopped: return "STOPPED";
    }
    return "?";
}

std::optional<Phase> phase_from_string(std::string_view text) noexcept {
    for (Phase p : {Phase::idle, Phase::armed, Phase::ringing, Phase::stopped}) {
        if (to_string(p) == text) return p;
    }
    return std::nullopt;
}

void EngineConfig::validate() const {
    if (satisfaction_band.low > satisfaction_band.high || satisfaction_band.low < kPlausibleBand.low ||
        satisfaction_band.high > kPlausibleBand.high)
        throw ConfigError("satisfaction band must be a non-empty sub-range of [23, 200]");
    if (required_streak < 1) throw ConfigError("required_streak must be at least 1");
    if (!in_adc_range(latch_set_threshold)) throw ConfigError("latch_set_threshold outside ADC range");
}

AlarmEngineState make_engine(const EngineConfig& config) {
    config.validate();
    AlarmEngineState state;
    state.config = config;
    return state;
}

std::int64_t event_time(const EngineEvent& event) noexcept {
    return std::visit(overloaded{
                          [](const ClockTick& e) { return e.t_ms; },
                          [](const AlarmLineLevel& e) { return e.t_ms; },
                          [](const BpmReading& e) { return e.estimate.t_ms; },
                          [](const Disarm& e) { return e.t_ms; },
                      },
                      event);
}

std::string_view event_kind(const EngineEvent& event) noexcept {
    return std::visit(overloaded{
                          [](const ClockTick&) { return std::string_view("ClockTick"); },
                          [](const AlarmLineLevel&) { return std::string_view("AlarmLineLevel"); },
                          [](const BpmReading&) { return std::string_view("BpmReading"); },
                          [](const Disarm&) { return std::string_view("Disarm"); },
                      },
                      event);
}

AlarmEngineState set_alarm(AlarmEngineState state, std::int64_t alarm_time_ms) {
    if (state.phase == Phase::ringing) throw StateError("cannot set the alarm while it is ringing");
    state.phase = Phase::armed;
    state.alarm_time_ms = alarm_time_ms;
    state.latch = Latch::reset;
    state.in_band_streak = 0;
    return state;
}

AlarmEngineState latch_alarm_line(AlarmEngineState state, int analog_level) {
    if (state.phase != Phase::armed && state.phase != Phase::ringing) return state;
    if (analog_level >= state.config.latch_set_threshold) state.latch = Latch::set;
    return state;
}

StepResult step(const AlarmEngineState& state, const EngineEvent& event) {
    const std::int64_t t = event_time(event);
    if (state.last_event_t_ms && t < *state.last_event_t_ms)
        throw StreamError(state.events_processed, "event at " + std::to_string(t) + " ms precedes " +
                                                      std::to_string(*state.last_event_t_ms) + " ms");

    StepResult result{state, {}};
    result.state.last_event_t_ms = t;
    ++result.state.events_processed;
    auto& s = result.state;
    const auto kind = event_kind(event);

    std::visit(overloaded{
                   [&](const ClockTick& e) {
                       if (s.phase == Phase::armed && s.alarm_time_ms && e.t_ms >= *s.alarm_time_ms)
                           start_ringing(result, e.t_ms, kind);
                   },
                   [&](const AlarmLineLevel& e) {
                       s = latch_alarm_line(s, e.level);
                       if (s.phase == Phase::armed && s.latch == Latch::set) start_ringing(result, e.t_ms, kind);
                   },
                   [&](const BpmReading& e) {
                       if (s.phase != Phase::ringing) return;
                       const auto& est = e.estimate;
                       if (est.status == BpmStatus::valid && s.config.satisfaction_band.contains(est.bpm)) {
                           if (++s.in_band_streak >= s.config.required_streak) {
                               s.in_band_streak = 0;
                               transition(result, Phase::stopped, est.t_ms, kind);
                           }
                       } else {
                           s.in_band_streak = 0;
                       }
                   },
                   [&](const Disarm& e) {
                       s.latch = Latch::reset;
                       s.in_band_streak = 0;
                       s.alarm_time_ms.reset();
                       transition(result, Phase::idle, e.t_ms, kind);
                   },
               },
               event);
    return result;
}

EngineRun run_engine(AlarmEngineState initial, std::span<const EngineEvent> events) {
    EngineRun run{std::move(initial), {}, {}};
    for (std::size_t i = 0; i < events.size(); ++i) {
        StepResult r;
        try {
            r = step(run.final_state, events[i]);
        } catch (const Error& e) {
            throw StreamError(i, e.what());
        }
        for (auto& action : r.actions) {
            if (const auto* log = std::get_if<LogTransition>(&action)) run.transitions.push_back(*log);
            run.actions.push_back(std::move(action));
        }
        run.final_state = std::move(r.state);
    }
    return run;
}

std::string to_json_line(const LogTransition& transition) {
    nlohmann::ordered_json j;
    j["t_ms"] = transition.t_ms;
    j["from"] = to_string(transition.from);
    j["to"] = to_string(transition.to);
    j["trigger"] = transition.trigger;
    return j.dump();
}

}  // namespace pulsealarm

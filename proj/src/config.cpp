#include "pulsealarm/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "pulsealarm/errors.hpp"

namespace pulsealarm {

namespace {

using nlohmann::json;

// Walks one JSON object, tracking which keys were consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    void allow_only(std::initializer_list<std::string_view> keys) const {
        for (const auto& [key, value] : j_.items()) {
            bool known = false;
            for (auto k : keys) known = known || key == k;
            if (!known) throw ConfigError("unknown key " + child(key));
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    void read(const std::string& key, T& out) const {
        if (!j_.contains(key)) return;
        out = as<T>(j_.at(key), child(key));
    }

    template <class T>
    void read(const std::string& key, std::optional<T>& out) const {
        if (!j_.contains(key)) return;
        out = as<T>(j_.at(key), child(key));
    }

    Section section(const std::string& key) const { return Section(j_.at(key), child(key)); }
    const json& raw(const std::string& key) const { return j_.at(key); }
    std::string child(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    template <class T>
    static T as(const json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(path + ": expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return v.get<T>();
                if (v.get<std::int64_t>() < 0) throw ConfigError(path + ": must be non-negative");
            }
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(path + ": expected a number");
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, std::filesystem::path>) {
            if (!v.is_string()) throw ConfigError(path + ": expected a string");
            return T(v.get<std::string>());
        } else if constexpr (std::is_same_v<T, BandMode>) {
            if (!v.is_string()) throw ConfigError(path + ": expected FIXED or AGE_DERIVED");
            auto mode = band_mode_from_string(v.get<std::string>());
            if (!mode) throw ConfigError(path + ": expected FIXED or AGE_DERIVED");
            return *mode;
        } else if constexpr (std::is_same_v<T, Phase>) {
            if (!v.is_string()) throw ConfigError(path + ": expected a phase name");
            auto phase = phase_from_string(v.get<std::string>());
            if (!phase) throw ConfigError(path + ": unknown phase '" + v.get<std::string>() + "'");
            return *phase;
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

    const json& j_;
    std::string path_;
};

std::vector<RateSegment> parse_schedule(const json& v, const std::string& path) {
    if (v.is_number()) return {{0, v.get<double>()}};
    if (!v.is_array()) throw ConfigError(path + ": expected a number or a list of [start_ms, bpm] pairs");
    std::vector<RateSegment> schedule;
    for (const auto& seg : v) {
        if (!seg.is_array() || seg.size() != 2 || !seg[0].is_number_integer() || !seg[1].is_number())
            throw ConfigError(path + ": each segment must be [start_ms, bpm]");
        schedule.push_back({seg[0].get<std::int64_t>(), seg[1].get<double>()});
    }
    return schedule;
}

WaveformSpec parse_waveform(const Section& s) {
    s.allow_only({"duration_ms", "sample_rate_hz", "heart_rate_bpm", "pulse_amplitude", "baseline", "pulse_width_ms",
                  "noise_stddev", "wander_amplitude", "wander_period_ms", "stray_pulses", "rng_seed"});
    WaveformSpec spec;
    s.read("duration_ms", spec.duration_ms);
    s.read("sample_rate_hz", spec.sample_rate_hz);
    if (s.has("heart_rate_bpm")) spec.schedule = parse_schedule(s.raw("heart_rate_bpm"), s.child("heart_rate_bpm"));
    s.read("pulse_amplitude", spec.pulse_amplitude);
    s.read("baseline", spec.baseline);
    s.read("pulse_width_ms", spec.pulse_width_ms);
    s.read("noise_stddev", spec.noise_stddev);
    s.read("wander_amplitude", spec.wander_amplitude);
    s.read("wander_period_ms", spec.wander_period_ms);
    s.read("rng_seed", spec.rng_seed);
    if (s.has("stray_pulses")) {
        const auto& list = s.raw("stray_pulses");
        if (!list.is_array()) throw ConfigError(s.child("stray_pulses") + ": expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Section p(list[i], s.child("stray_pulses") + "[" + std::to_string(i) + "]");
            p.allow_only({"t_ms", "peak", "width_ms"});
            StrayPulse stray;
            p.read("t_ms", stray.t_ms);
            p.read("peak", stray.peak);
            p.read("width_ms", stray.width_ms);
            spec.stray_pulses.push_back(stray);
        }
    }
    return spec;
}

ScenarioOverrides parse_scenario(const Section& s) {
    s.allow_only({"sleep_ms", "reaction_ms", "exercise_ms", "exercise_bpm", "sample_rate_hz", "noise_stddev", "rng_seed"});
    ScenarioOverrides o;
    s.read("sleep_ms", o.sleep_ms);
    s.read("reaction_ms", o.reaction_ms);
    s.read("exercise_ms", o.exercise_ms);
    s.read("exercise_bpm", o.exercise_bpm);
    s.read("sample_rate_hz", o.sample_rate_hz);
    s.read("noise_stddev", o.noise_stddev);
    s.read("rng_seed", o.rng_seed);
    return o;
}

BenchConfig parse_bench(const Section& s, const SchmittConfig& schmitt) {
    s.allow_only({"bpm", "duration_ms", "sample_rate_hz", "stray_counts", "noise_levels", "seeds_per_cell", "stray_peak",
                  "stray_width_ms", "naive_threshold", "seed"});
    BenchConfig b;
    b.schmitt = schmitt;
    s.read("bpm", b.bpm);
    s.read("duration_ms", b.duration_ms);
    s.read("sample_rate_hz", b.sample_rate_hz);
    s.read("seeds_per_cell", b.seeds_per_cell);
    s.read("stray_peak", b.stray_peak);
    s.read("stray_width_ms", b.stray_width_ms);
    s.read("naive_threshold", b.naive_threshold);
    s.read("seed", b.seed);
    if (s.has("stray_counts")) {
        const auto& v = s.raw("stray_counts");
        if (!v.is_array()) throw ConfigError(s.child("stray_counts") + ": expected a list");
        b.stray_counts.clear();
        for (const auto& x : v) {
            if (!x.is_number_unsigned()) throw ConfigError(s.child("stray_counts") + ": expected non-negative integers");
            b.stray_counts.push_back(x.get<std::size_t>());
        }
    }
    if (s.has("noise_levels")) {
        const auto& v = s.raw("noise_levels");
        if (!v.is_array()) throw ConfigError(s.child("noise_levels") + ": expected a list");
        b.noise_levels.clear();
        for (const auto& x : v) {
            if (!x.is_number() || x.get<double>() < 0) throw ConfigError(s.child("noise_levels") + ": expected non-negative numbers");
            b.noise_levels.push_back(x.get<double>());
        }
    }
    return b;
}

template <class Fn>
auto rethrow_as_config(Fn&& fn) {
    try {
        return fn();
    } catch (const SpecError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

ScenarioConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }

    const Section s(root, "");
    s.allow_only({"profile", "schmitt", "engine", "smoothing_window", "scenario", "waveform", "input", "alarm_time_ms",
                  "expected_phase", "seed", "output", "bench"});

    ScenarioConfig c;
    if (s.has("profile")) {
        auto p = s.section("profile");
        p.allow_only({"age_years", "resting_bpm"});
        p.read("age_years", c.profile.age_years);
        p.read("resting_bpm", c.profile.resting_bpm);
    }
    if (s.has("schmitt")) {
        auto p = s.section("schmitt");
        p.allow_only({"upper_threshold", "lower_threshold", "refractory_ms"});
        p.read("upper_threshold", c.schmitt.upper_threshold);
        p.read("lower_threshold", c.schmitt.lower_threshold);
        p.read("refractory_ms", c.schmitt.refractory_ms);
    }
    if (s.has("engine")) {
        auto p = s.section("engine");
        p.allow_only({"band_mode", "required_streak", "latch_set_threshold"});
        p.read("band_mode", c.band_mode);
        p.read("required_streak", c.required_streak);
        p.read("latch_set_threshold", c.latch_set_threshold);
    }
    s.read("smoothing_window", c.smoothing_window);
    if (s.has("scenario")) c.scenario = parse_scenario(s.section("scenario"));
    if (s.has("waveform")) c.waveform = parse_waveform(s.section("waveform"));
    s.read("input", c.input);
    s.read("alarm_time_ms", c.alarm_time_ms);
    s.read("expected_phase", c.expected_phase);
    s.read("seed", c.seed);
    s.read("output", c.output);
    c.bench = s.has("bench") ? parse_bench(s.section("bench"), c.schmitt) : BenchConfig{.schmitt = c.schmitt};

    const int sources = int(c.scenario.has_value()) + int(c.waveform.has_value()) + int(c.input.has_value());
    if (sources > 1) throw ConfigError("at most one of scenario, waveform and input may be given");
    if (c.scenario && (c.alarm_time_ms || c.expected_phase))
        throw ConfigError("alarm_time_ms and expected_phase come from the scenario; drop them or use waveform/input");

    rethrow_as_config([&] {
        c.profile.validate();
        c.schmitt.validate();
        if (c.smoothing_window == 0) throw ConfigError("smoothing_window must be at least 1");
        if (c.required_streak < 1) throw ConfigError("engine.required_streak must be at least 1");
        if (!in_adc_range(c.latch_set_threshold)) throw ConfigError("engine.latch_set_threshold outside ADC range");
        if (c.waveform) c.waveform->validate();
        c.bench.validate();
        return 0;
    });
    if (c.seed) apply_seed(c, *c.seed);
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

void apply_seed(ScenarioConfig& config, std::uint64_t seed) {
    config.seed = seed;
    if (config.scenario) config.scenario->rng_seed = seed;
    if (config.waveform) config.waveform->rng_seed = seed;
    config.bench.seed = seed;
}

namespace {

EngineConfig engine_config(const ScenarioConfig& c) {
    EngineConfig e;
    e.satisfaction_band = satisfaction_band(c.profile, c.band_mode);
    e.required_streak = c.required_streak;
    e.latch_set_threshold = c.latch_set_threshold;
    e.validate();
    return e;
}

WakeScenario scenario_for(const ScenarioConfig& c) {
    ScenarioOverrides o = c.scenario.value_or(ScenarioOverrides{});
    if (!c.scenario && c.seed) o.rng_seed = *c.seed;
    o.band_mode = c.band_mode;
    o.required_streak = c.required_streak;
    o.smoothing_window = c.smoothing_window;
    return make_wake_scenario(c.profile, o);
}

}  // namespace

PipelineConfig resolve_pipeline(const ScenarioConfig& c) {
    PipelineConfig p;
    p.schmitt = c.schmitt;
    p.engine = engine_config(c);
    p.smoothing_window = c.smoothing_window;
    if (c.waveform || c.input) {
        if (!c.alarm_time_ms) throw ConfigError("alarm_time_ms is required with waveform or input");
        if (!c.expected_phase) throw ConfigError("expected_phase is required with waveform or input");
        p.alarm_time_ms = *c.alarm_time_ms;
        p.expected_final_phase = *c.expected_phase;
    } else {
        // Explicit values win (serve streams samples from elsewhere).
        if (c.alarm_time_ms && c.expected_phase) {
            p.alarm_time_ms = *c.alarm_time_ms;
            p.expected_final_phase = *c.expected_phase;
        } else {
            const auto sc = scenario_for(c);
            p.alarm_time_ms = c.alarm_time_ms.value_or(sc.alarm_time_ms);
            p.expected_final_phase = c.expected_phase.value_or(sc.expected_final_phase);
        }
    }
    return p;
}

ResolvedRun resolve_run(const ScenarioConfig& c) {
    ResolvedRun run;
    run.pipeline = resolve_pipeline(c);
    if (c.waveform) {
        run.samples = synthesize(*c.waveform).samples;
    } else if (c.input) {
        run.samples = read_waveform(*c.input);
    } else {
        run.scenario = scenario_for(c);
        run.samples = synthesize(run.scenario->spec).samples;
    }
    return run;
}

}  // namespace pulsealarm

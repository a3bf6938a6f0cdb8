#pragma once

// JSON scenario configuration. Unknown keys and wrong types are rejected with
// ConfigError naming the offending key path.
//
//   {
//     "profile":  {"age_years": 20, "resting_bpm": 90},
//     "schmitt":  {"upper_threshold": 550, "lower_threshold": 470, "refractory_ms": 250},
//     "engine":   {"band_mode": "FIXED", "required_streak": 3, "latch_set_threshold": 512},
//     "smoothing_window": 5,
//     "scenario": {"sleep_ms": 30000, "reaction_ms": 10000, "exercise_ms": 60000,
//                  "exercise_bpm": 150, "sample_rate_hz": 1000, "noise_stddev": 0},
//     "waveform": {...},            // instead of "scenario"
//     "input": "samples.csv",       // instead of "scenario"
//     "alarm_time_ms": 30000,       // with "waveform" / "input"
//     "expected_phase": "STOPPED",  // with "waveform" / "input"
//     "seed": 1,
//     "output": "report.jsonl",
//     "bench": {...}
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pulsealarm/bench.hpp"
#include "pulsealarm/pipeline.hpp"
#include "pulsealarm/waveform.hpp"

namespace pulsealarm {

struct ScenarioConfig {
    UserProfile profile;
    SchmittConfig schmitt;
    BandMode band_mode = BandMode::fixed;
    int required_streak = 3;
    int latch_set_threshold = 512;
    std::size_t smoothing_window = kDefaultSmoothingWindow;

    std::optional<ScenarioOverrides> scenario;
    std::optional<WaveformSpec> waveform;
    std::optional<std::filesystem::path> input;
    std::optional<std::int64_t> alarm_time_ms;
    std::optional<Phase> expected_phase;

    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output;
    BenchConfig bench;
};

ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Overrides every RNG seed in the configuration.
void apply_seed(ScenarioConfig& config, std::uint64_t seed);

struct ResolvedRun {
    std::vector<Sample> samples;
    PipelineConfig pipeline;
    std::optional<WakeScenario> scenario;
};

// Builds the sample stream and pipeline settings. With no waveform or input
// the default wake scenario is used.
ResolvedRun resolve_run(const ScenarioConfig& config);

// Pipeline settings only (for streamed input).
PipelineConfig resolve_pipeline(const ScenarioConfig& config);

}  // namespace pulsealarm

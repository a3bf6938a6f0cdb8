#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pulsealarm/alarm.hpp"
#include "pulsealarm/ingest.hpp"
#include "pulsealarm/signal.hpp"

namespace pulsealarm {

struct PipelineConfig {
    SchmittConfig schmitt;
    EngineConfig engine;
    std::size_t smoothing_window = kDefaultSmoothingWindow;
    std::int64_t alarm_time_ms = 0;
    Phase expected_final_phase = Phase::stopped;
};

struct ReadingCounts {
    std::size_t valid = 0;
    std::size_t rejected_low = 0;
    std::size_t rejected_high = 0;

    std::size_t total() const noexcept { return valid + rejected_low + rejected_high; }
};

struct RunReport {
    std::vector<LogTransition> transitions;
    std::size_t sample_count = 0;
    std::size_t beat_count = 0;
    std::vector<BpmEstimate> readings;
    ReadingCounts counts;
    std::size_t in_band_readings = 0;
    Phase final_phase = Phase::idle;
    Phase expected_phase = Phase::idle;
    std::optional<ingest::DecodeCounts> ingest;
    std::size_t dropped_samples = 0;  // out-of-order samples refused by the detector

    bool phase_matches() const noexcept { return final_phase == expected_phase; }
};

// Samples -> Schmitt detector -> median estimator -> plausibility filter -> alarm engine.
// Every sample also advances the engine clock.
class Pipeline {
public:
    explicit Pipeline(const PipelineConfig& config);

    void push(const Sample& sample);

    const AlarmEngineState& engine() const noexcept { return engine_; }
    RunReport report() const;

private:
    PipelineConfig config_;
    BeatDetector detector_;
    BpmEstimator estimator_;
    AlarmEngineState engine_;
    RunReport report_;
};

RunReport run_pipeline(std::span<const Sample> samples, const PipelineConfig& config);

// Line-delimited JSON: one record per reading, per transition, then a summary.
void write_report_jsonl(const RunReport& report, std::ostream& out);
// Serial-monitor style listing plus totals.
void write_report_summary(const RunReport& report, std::ostream& out);

}  // namespace pulsealarm

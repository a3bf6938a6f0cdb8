#include "pulsealarm/pipeline.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace pulsealarm {

Pipeline::Pipeline(const PipelineConfig& config)
    : config_(config),
      detector_(config.schmitt),
      estimator_(config.smoothing_window),
      engine_(set_alarm(make_engine(config.engine), config.alarm_time_ms)) {
    report_.expected_phase = config.expected_final_phase;
    report_.final_phase = engine_.phase;
}

void Pipeline::push(const Sample& sample) {
    const auto beat = detector_.push(sample);
    ++report_.sample_count;

    auto apply = [this](const EngineEvent& event) {
        auto r = step(engine_, event);
        engine_ = std::move(r.state);
        for (const auto& action : r.actions) {
            if (const auto* log = std::get_if<LogTransition>(&action)) report_.transitions.push_back(*log);
        }
    };

    apply(ClockTick{sample.t_ms});
    if (!beat) return;

    ++report_.beat_count;
    const auto estimate = estimator_.push(*beat);
    if (!estimate) return;

    report_.readings.push_back(*estimate);
    switch (estimate->status) {
        case BpmStatus::valid:
            ++report_.counts.valid;
            if (config_.engine.satisfaction_band.contains(estimate->bpm)) ++report_.in_band_readings;
            break;
        case BpmStatus::rejected_low: ++report_.counts.rejected_low; break;
        case BpmStatus::rejected_high: ++report_.counts.rejected_high; break;
    }
    apply(BpmReading{*estimate});
}

RunReport Pipeline::report() const {
    RunReport r = report_;
    r.final_phase = engine_.phase;
    return r;
}

RunReport run_pipeline(std::span<const Sample> samples, const PipelineConfig& config) {
    Pipeline pipeline(config);
    for (const auto& s : samples) pipeline.push(s);
    return pipeline.report();
}

void write_report_jsonl(const RunReport& report, std::ostream& out) {
    using nlohmann::ordered_json;
    for (const auto& r : report.readings) {
        ordered_json j;
        j["record"] = "reading";
        j["t_ms"] = r.t_ms;
        j["bpm"] = r.bpm;
        j["status"] = to_string(r.status);
        out << j.dump() << '\n';
    }
    for (const auto& t : report.transitions) {
        auto j = ordered_json::parse(to_json_line(t));
        ordered_json rec;
        rec["record"] = "transition";
        rec.update(j);
        out << rec.dump() << '\n';
    }

    ordered_json s;
    s["record"] = "summary";
    s["samples"] = report.sample_count;
    s["beats"] = report.beat_count;
    s["readings"] = report.counts.total();
    s["valid"] = report.counts.valid;
    s["rejected_low"] = report.counts.rejected_low;
    s["rejected_high"] = report.counts.rejected_high;
    s["in_band"] = report.in_band_readings;
    s["final_phase"] = to_string(report.final_phase);
    s["expected_phase"] = to_string(report.expected_phase);
    if (report.ingest) {
        s["frames"] = report.ingest->samples;
        s["gaps"] = report.ingest->gaps;
        s["corrupt_frames"] = report.ingest->corrupt;
        s["resyncs"] = report.ingest->resyncs;
        s["skipped_bytes"] = report.ingest->skipped_bytes;
        s["dropped_samples"] = report.dropped_samples;
    }
    out << s.dump() << '\n';
}

void write_report_summary(const RunReport& report, std::ostream& out) {
    char line[96];
    for (const auto& r : report.readings) {
        std::snprintf(line, sizeof line, "t=%9lld ms  BPM: %6.1f  %s\n", static_cast<long long>(r.t_ms), r.bpm,
                      std::string(to_string(r.status)).c_str());
        out << line;
    }
    out << "--\n";
    for (const auto& t : report.transitions)
        out << "transition " << to_string(t.from) << " -> " << to_string(t.to) << " at " << t.t_ms << " ms ("
            << t.trigger << ")\n";
    out << "samples " << report.sample_count << ", beats " << report.beat_count << ", readings "
        << report.counts.total() << " (valid " << report.counts.valid << ", low " << report.counts.rejected_low
        << ", high " << report.counts.rejected_high << "), in band " << report.in_band_readings << '\n';
    if (report.ingest) {
        out << "frames " << report.ingest->samples << ", gaps " << report.ingest->gaps << ", corrupt "
            << report.ingest->corrupt << ", resyncs " << report.ingest->resyncs << '\n';
    }
    out << "final phase " << to_string(report.final_phase) << " (expected " << to_string(report.expected_phase)
        << ")\n";
}

}  // namespace pulsealarm

#include "pulsealarm/signal.hpp"

#include <algorithm>
#include <string>

#include "pulsealarm/errors.hpp"

namespace pulsealarm {

namespace {

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void check_sample(const Sample& sample, const std::optional<std::int64_t>& last_t_ms, std::size_t index) {
    if (!in_adc_range(sample.value))
        throw StreamError(index, "value " + std::to_string(sample.value) + " outside ADC range");
    if (sample.t_ms < 0) throw StreamError(index, "negative timestamp");
    if (last_t_ms && sample.t_ms <= *last_t_ms)
        throw StreamError(index, "timestamp " + std::to_string(sample.t_ms) + " not after " +
                                     std::to_string(*last_t_ms));
}

}  // namespace

bool in_adc_range(int value) noexcept { return value >= kAdcMin && value <= kAdcMax; }

void SchmittConfig::validate() const {
    if (lower_threshold >= upper_threshold)
        throw DomainError("schmitt lower_threshold must be below upper_threshold");
    if (refractory_ms <= 0) throw DomainError("schmitt refractory_ms must be positive");
}

SchmittStep schmitt_step(const SchmittState& state, const SchmittConfig& config, const Sample& sample) noexcept {
    SchmittStep out{state, false};
    if (state.level == Level::low && sample.value >= config.upper_threshold) {
        out.state.level = Level::high;
        const bool in_refractory =
            state.last_beat_t_ms && sample.t_ms - *state.last_beat_t_ms < config.refractory_ms;
        if (!in_refractory) {
            out.rising_edge = true;
            out.state.last_beat_t_ms = sample.t_ms;
        }
    } else if (state.level == Level::high && sample.value <= config.lower_threshold) {
        out.state.level = Level::low;
    }
    return out;
}

BeatDetector::BeatDetector(SchmittConfig config) : config_(config) { config_.validate(); }

std::optional<BeatEvent> BeatDetector::push(const Sample& sample) {
    check_sample(sample, last_t_ms_, index_);
    ++index_;
    last_t_ms_ = sample.t_ms;

    const auto previous_beat = state_.last_beat_t_ms;
    const auto step = schmitt_step(state_, config_, sample);
    state_ = step.state;
    if (!step.rising_edge) return std::nullopt;

    BeatEvent beat{sample.t_ms, std::nullopt};
    if (previous_beat) beat.ibi_ms = sample.t_ms - *previous_beat;
    return beat;
}

std::vector<BeatEvent> detect_beats(std::span<const Sample> samples, const SchmittConfig& config) {
    BeatDetector detector(config);
    std::vector<BeatEvent> beats;
    for (const auto& s : samples) {
        if (auto beat = detector.push(s)) beats.push_back(*beat);
    }
    return beats;
}

std::vector<BeatEvent> naive_detect_beats(std::span<const Sample> samples, int threshold) {
    std::vector<BeatEvent> beats;
    std::optional<std::int64_t> last_t_ms;
    bool above = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        check_sample(s, last_t_ms, i);
        last_t_ms = s.t_ms;

        const bool now_above = s.value >= threshold;
        if (now_above && !above) {
            BeatEvent beat{s.t_ms, std::nullopt};
            if (!beats.empty()) beat.ibi_ms = s.t_ms - beats.back().t_ms;
            beats.push_back(beat);
        }
        above = now_above;
    }
    return beats;
}

std::string_view to_string(BpmStatus status) noexcept {
    switch (status) {
        case BpmStatus::valid: return "VALID";
        case BpmStatus::rejected_low: return "REJECTED_LOW";
        case BpmStatus::rejected_high: return "REJECTED_HIGH";
    }
    return "?";
}

double bpm_from_ibi(double ibi_ms) {
    if (!(ibi_ms > 0.0)) throw DomainError("inter-beat interval must be positive");
    return 60000.0 / ibi_ms;
}

BpmEstimate plausibility_filter(double bpm, std::int64_t t_ms) {
    BpmStatus status = BpmStatus::valid;
    if (bpm < kPlausibleMinBpm)
        status = BpmStatus::rejected_low;
    else if (bpm > kPlausibleMaxBpm)
        status = BpmStatus::rejected_high;
    return {t_ms, bpm, status};
}

std::optional<BpmEstimate> estimate_bpm(std::span<const BeatEvent> beats, std::size_t smoothing_window) {
    if (smoothing_window == 0) throw DomainError("smoothing window must be at least 1");

    std::vector<double> recent;
    for (auto it = beats.rbegin(); it != beats.rend() && recent.size() < smoothing_window; ++it) {
        if (it->ibi_ms) recent.push_back(bpm_from_ibi(static_cast<double>(*it->ibi_ms)));
    }
    if (recent.empty()) return std::nullopt;
    return plausibility_filter(median(std::move(recent)), beats.back().t_ms);
}

BpmEstimator::BpmEstimator(std::size_t smoothing_window) : window_(smoothing_window) {
    if (window_ == 0) throw DomainError("smoothing window must be at least 1");
}

std::optional<BpmEstimate> BpmEstimator::push(const BeatEvent& beat) {
    if (!beat.ibi_ms) return std::nullopt;
    recent_bpm_.push_back(bpm_from_ibi(static_cast<double>(*beat.ibi_ms)));
    if (recent_bpm_.size() > window_) recent_bpm_.pop_front();
    return plausibility_filter(median({recent_bpm_.begin(), recent_bpm_.end()}), beat.t_ms);
}

}  // namespace pulsealarm

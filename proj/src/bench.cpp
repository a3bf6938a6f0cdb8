#include "pulsealarm/bench.hpp"

#include <cstdio>
#include <ostream>

#include "pulsealarm/errors.hpp"

namespace pulsealarm {

BeatScore& BeatScore::operator+=(const BeatScore& o) {
    truth += o.truth;
    detected += o.detected;
    matched += o.matched;
    false_beats += o.false_beats;
    missed += o.missed;
    return *this;
}

BeatScore score_beats(std::span<const BeatEvent> beats, const GroundTruth& truth, std::int64_t pulse_width_ms,
                      std::int64_t record_end_ms, double tolerance_ms) {
    const auto& onsets = truth.beat_times_ms;
    const auto width = static_cast<double>(pulse_width_ms);
    const auto end = static_cast<double>(record_end_ms);

    BeatScore score;
    for (double tb : onsets) {
        if (tb + width <= end) ++score.truth;
    }

    std::size_t next = 0;
    for (const auto& beat : beats) {
        const auto t = static_cast<double>(beat.t_ms);
        while (next < onsets.size() && onsets[next] + width + tolerance_ms < t) ++next;
        if (next < onsets.size() && onsets[next] <= t) {
            if (onsets[next] + width <= end) {
                ++score.detected;
                ++score.matched;
            }
            ++next;
        } else {
            ++score.detected;
            ++score.false_beats;
        }
    }
    score.missed = score.truth - score.matched;
    return score;
}

void BenchConfig::validate() const {
    schmitt.validate();
    if (seeds_per_cell == 0) throw ConfigError("bench.seeds_per_cell must be at least 1");
    if (stray_counts.empty() || noise_levels.empty()) throw ConfigError("bench sweep axes must not be empty");
    if (!in_adc_range(naive_threshold)) throw ConfigError("bench.naive_threshold outside ADC range");
}

BenchResult run_bench(const BenchConfig& config) {
    config.validate();

    BenchResult result;
    for (std::size_t strays : config.stray_counts) {
        for (double noise : config.noise_levels) {
            BenchRow row{strays, noise, {}, {}};
            for (std::size_t k = 0; k < config.seeds_per_cell; ++k) {
                WaveformSpec spec;
                spec.duration_ms = config.duration_ms;
                spec.sample_rate_hz = config.sample_rate_hz;
                spec.schedule = {{0, config.bpm}};
                spec.noise_stddev = noise;
                spec.rng_seed = config.seed + k;
                spec.stray_pulses =
                    scatter_stray_pulses(spec, strays, config.stray_peak, config.stray_width_ms, config.seed * 7919 + k);
                const auto wave = synthesize(spec);
                const double tol = spec.sample_period_ms();

                row.naive += score_beats(naive_detect_beats(wave.samples, config.naive_threshold), wave.truth,
                                         spec.pulse_width_ms, spec.duration_ms, tol);
                row.schmitt += score_beats(detect_beats(wave.samples, config.schmitt), wave.truth,
                                           spec.pulse_width_ms, spec.duration_ms, tol);
            }
            if (row.schmitt.false_beats > 0 &&
                (!result.schmitt_breaking_noise || noise < *result.schmitt_breaking_noise))
                result.schmitt_breaking_noise = noise;
            result.rows.push_back(row);
        }
    }
    return result;
}

void write_bench_csv(const BenchResult& result, std::ostream& out) {
    out << "stray_count,noise_stddev,detector,truth_beats,detected,false_beats,missed_beats\n";
    for (const auto& row : result.rows) {
        for (const auto& [name, s] : {std::pair{"naive", row.naive}, std::pair{"schmitt", row.schmitt}}) {
            out << row.stray_count << ',' << row.noise_stddev << ',' << name << ',' << s.truth << ',' << s.detected
                << ',' << s.false_beats << ',' << s.missed << '\n';
        }
    }
}

void write_bench_table(const BenchResult& result, const BenchConfig& config, std::ostream& out) {
    char line[128];
    std::snprintf(line, sizeof line, "naive threshold %d, schmitt [%d, %d] refractory %lld ms, %zu seeds/cell\n",
                  config.naive_threshold, config.schmitt.lower_threshold, config.schmitt.upper_threshold,
                  static_cast<long long>(config.schmitt.refractory_ms), config.seeds_per_cell);
    out << line;
    std::snprintf(line, sizeof line, "%7s %7s | %11s %11s | %11s %11s\n", "strays", "noise", "naive_false",
                  "naive_miss", "schm_false", "schm_miss");
    out << line;
    for (const auto& row : result.rows) {
        std::snprintf(line, sizeof line, "%7zu %7.1f | %11zu %11zu | %11zu %11zu\n", row.stray_count,
                      row.noise_stddev, row.naive.false_beats, row.naive.missed, row.schmitt.false_beats,
                      row.schmitt.missed);
        out << line;
    }
    if (result.schmitt_breaking_noise)
        out << "schmitt detector first reports false beats at noise stddev " << *result.schmitt_breaking_noise
            << '\n';
    else
        out << "schmitt detector reported no false beats across the sweep\n";
}

}  // namespace pulsealarm

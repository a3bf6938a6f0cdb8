#include "pulsealarm/waveform.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "pulsealarm/errors.hpp"

namespace pulsealarm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double raised_cosine(double since_onset_ms, double width_ms) {
    if (since_onset_ms < 0.0 || since_onset_ms >= width_ms) return 0.0;
    return 0.5 * (1.0 - std::cos(kTwoPi * since_onset_ms / width_ms));
}

double rate_at(const std::vector<RateSegment>& schedule, double t_ms) {
    double bpm = schedule.front().bpm;
    for (const auto& seg : schedule) {
        if (static_cast<double>(seg.start_ms) <= t_ms) bpm = seg.bpm;
    }
    return bpm;
}

std::vector<double> beat_onsets(const WaveformSpec& spec) {
    std::vector<double> beats;
    const auto end = static_cast<double>(spec.duration_ms);
    for (double t = 0.0; t < end; t += 60000.0 / rate_at(spec.schedule, t)) beats.push_back(t);
    return beats;
}

template <class T>
bool parse_field(std::string_view text, T& out) {
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !text.empty();
}

}  // namespace

void WaveformSpec::validate() const {
    if (duration_ms <= 0) throw SpecError("duration_ms", "must be positive");
    if (sample_rate_hz < 1 || sample_rate_hz > 1000) throw SpecError("sample_rate_hz", "must lie in [1, 1000]");
    if (schedule.empty()) throw SpecError("heart_rate_bpm", "schedule is empty");
    if (schedule.front().start_ms != 0) throw SpecError("heart_rate_bpm", "first segment must start at 0 ms");
    double max_bpm = 0.0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i].bpm > 0.0)) throw SpecError("heart_rate_bpm", "segment bpm must be positive");
        if (i > 0 && schedule[i].start_ms <= schedule[i - 1].start_ms)
            throw SpecError("heart_rate_bpm", "segment starts must increase");
        max_bpm = std::max(max_bpm, schedule[i].bpm);
    }
    if (baseline < 0 || baseline > kAdcMax) throw SpecError("baseline", "outside ADC range");
    if (pulse_amplitude < 0) throw SpecError("pulse_amplitude", "must be non-negative");
    if (baseline + pulse_amplitude > kAdcMax) throw SpecError("pulse_amplitude", "baseline + amplitude exceeds 1023");
    if (pulse_width_ms <= 0) throw SpecError("pulse_width_ms", "must be positive");
    if (static_cast<double>(pulse_width_ms) >= 60000.0 / max_bpm)
        throw SpecError("pulse_width_ms", "pulses would overlap at the fastest segment rate");
    if (!(noise_stddev >= 0.0)) throw SpecError("noise_stddev", "must be non-negative");
    if (!(wander_amplitude >= 0.0)) throw SpecError("wander_amplitude", "must be non-negative");
    if (wander_period_ms <= 0) throw SpecError("wander_period_ms", "must be positive");
    for (const auto& stray : stray_pulses) {
        if (stray.t_ms < 0) throw SpecError("stray_pulses", "negative time");
        if (stray.width_ms <= 0) throw SpecError("stray_pulses", "width must be positive");
        if (!in_adc_range(stray.peak)) throw SpecError("stray_pulses", "peak outside ADC range");
    }
}

Waveform synthesize(const WaveformSpec& spec) {
    spec.validate();

    Waveform out;
    out.truth.beat_times_ms = beat_onsets(spec);
    out.truth.segments = spec.schedule;

    const std::int64_t count = spec.duration_ms * spec.sample_rate_hz / 1000;
    out.samples.reserve(static_cast<std::size_t>(count));

    std::mt19937_64 rng(spec.rng_seed);
    std::normal_distribution<double> noise(0.0, spec.noise_stddev > 0.0 ? spec.noise_stddev : 1.0);

    const auto& beats = out.truth.beat_times_ms;
    const auto width = static_cast<double>(spec.pulse_width_ms);
    std::size_t beat = 0;

    for (std::int64_t i = 0; i < count; ++i) {
        const std::int64_t t_ms = i * 1000 / spec.sample_rate_hz;
        const auto t = static_cast<double>(t_ms);

        while (beat + 1 < beats.size() && beats[beat + 1] <= t) ++beat;
        double v = spec.baseline;
        if (!beats.empty()) v += spec.pulse_amplitude * raised_cosine(t - beats[beat], width);

        for (const auto& stray : spec.stray_pulses) {
            v += (stray.peak - spec.baseline) *
                 raised_cosine(t - static_cast<double>(stray.t_ms), static_cast<double>(stray.width_ms));
        }
        if (spec.wander_amplitude > 0.0)
            v += spec.wander_amplitude * std::sin(kTwoPi * t / static_cast<double>(spec.wander_period_ms));
        if (spec.noise_stddev > 0.0) v += noise(rng);

        const auto value = static_cast<int>(std::clamp<long>(std::lround(v), kAdcMin, kAdcMax));
        out.samples.push_back({t_ms, value});
    }
    return out;
}

std::vector<StrayPulse> scatter_stray_pulses(const WaveformSpec& spec, std::size_t count, int peak,
                                             std::int64_t width_ms, std::uint64_t seed) {
    spec.validate();
    if (width_ms <= 0) throw SpecError("stray_pulses", "width must be positive");

    constexpr std::int64_t kMargin = 20;
    const auto step = static_cast<std::int64_t>(std::max(1.0, spec.sample_period_ms()));
    const auto onsets = beat_onsets(spec);

    // Quiet windows [begin, end) where a stray may start.
    std::vector<std::pair<std::int64_t, std::int64_t>> windows;
    for (std::size_t i = 0; i < onsets.size(); ++i) {
        const double next = i + 1 < onsets.size() ? onsets[i + 1] : static_cast<double>(spec.duration_ms);
        const auto begin = static_cast<std::int64_t>(std::ceil(onsets[i])) + spec.pulse_width_ms + kMargin;
        const auto end = static_cast<std::int64_t>(std::floor(next)) - width_ms - kMargin;
        if (end > begin) windows.emplace_back(begin, end);
    }
    if (windows.empty() && count > 0) throw SpecError("stray_pulses", "no room between beats");

    std::mt19937_64 rng(seed);
    std::vector<StrayPulse> strays;
    for (std::size_t attempts = 0; strays.size() < count; ++attempts) {
        if (attempts > 1000 * (count + 1)) throw SpecError("stray_pulses", "cannot fit requested stray count");
        const auto& [begin, end] = windows[std::uniform_int_distribution<std::size_t>(0, windows.size() - 1)(rng)];
        std::int64_t t = std::uniform_int_distribution<std::int64_t>(begin, end - 1)(rng);
        t = (t + step - 1) / step * step;
        if (t >= end) continue;
        const bool overlaps = std::any_of(strays.begin(), strays.end(), [&](const StrayPulse& s) {
            return t < s.t_ms + s.width_ms + kMargin && s.t_ms < t + width_ms + kMargin;
        });
        if (!overlaps) strays.push_back({t, peak, width_ms});
    }
    std::sort(strays.begin(), strays.end(), [](const auto& a, const auto& b) { return a.t_ms < b.t_ms; });
    return strays;
}

std::optional<double> pulse_crossing_offset_ms(const WaveformSpec& spec, int level) {
    if (level <= spec.baseline) return 0.0;
    if (spec.pulse_amplitude <= 0) return std::nullopt;
    const double fraction = static_cast<double>(level - spec.baseline) / spec.pulse_amplitude;
    if (fraction > 1.0) return std::nullopt;
    return static_cast<double>(spec.pulse_width_ms) / kTwoPi * std::acos(1.0 - 2.0 * fraction);
}

void write_waveform(std::span<const Sample> samples, std::ostream& out) {
    out << "t_ms,value\n";
    for (const auto& s : samples) out << s.t_ms << ',' << s.value << '\n';
}

void write_waveform(std::span<const Sample> samples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_waveform(samples, out);
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Sample> read_waveform(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    if (line != "t_ms,value") throw ParseError(1, "expected header 't_ms,value'");

    std::vector<Sample> samples;
    for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(line_no, "expected two comma-separated fields");
        const std::string_view text(line);
        Sample s;
        if (!parse_field(text.substr(0, comma), s.t_ms) || s.t_ms < 0)
            throw ParseError(line_no, "bad t_ms '" + std::string(text.substr(0, comma)) + "'");
        if (!parse_field(text.substr(comma + 1), s.value))
            throw ParseError(line_no, "bad value '" + std::string(text.substr(comma + 1)) + "'");
        if (!in_adc_range(s.value))
            throw ParseError(line_no, "value " + std::to_string(s.value) + " outside ADC range [0, 1023]");
        samples.push_back(s);
    }
    return samples;
}

std::vector<Sample> read_waveform(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_waveform(in);
}

void check_monotone(std::span<const Sample> samples) {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].t_ms <= samples[i - 1].t_ms)
            throw StreamError(i, "timestamp " + std::to_string(samples[i].t_ms) + " not after " +
                                     std::to_string(samples[i - 1].t_ms));
    }
}

WakeScenario make_wake_scenario(const UserProfile& profile, const ScenarioOverrides& overrides) {
    profile.validate();

    WakeScenario sc;
    sc.satisfaction_band = satisfaction_band(profile, overrides.band_mode);
    sc.sleep_bpm = std::round(sleep_rate_range(profile.resting_bpm).midpoint());
    if (sc.sleep_bpm >= sc.satisfaction_band.low)
        throw ScenarioError("sleeping rate " + std::to_string(sc.sleep_bpm) +
                            " bpm already reaches the satisfaction band");
    sc.exercise_bpm = overrides.exercise_bpm.value_or(std::round(sc.satisfaction_band.midpoint()));
    if (!(sc.exercise_bpm > 0.0) || sc.exercise_bpm > 240.0)
        throw ScenarioError("exercise rate must lie in (0, 240] bpm");
    if (overrides.sleep_ms <= 0 || overrides.reaction_ms < 0 || overrides.exercise_ms <= 0)
        throw ScenarioError("scenario durations must be positive");

    sc.alarm_time_ms = overrides.sleep_ms;
    sc.exercise_start_ms = sc.alarm_time_ms + overrides.reaction_ms;

    auto& spec = sc.spec;
    spec.duration_ms = sc.exercise_start_ms + overrides.exercise_ms;
    spec.sample_rate_hz = overrides.sample_rate_hz;
    spec.schedule = {{0, sc.sleep_bpm}, {sc.exercise_start_ms, sc.exercise_bpm}};
    const double fastest = std::max(sc.sleep_bpm, sc.exercise_bpm);
    spec.pulse_width_ms = std::min<std::int64_t>(200, static_cast<std::int64_t>(0.6 * 60000.0 / fastest));
    spec.noise_stddev = overrides.noise_stddev;
    spec.rng_seed = overrides.rng_seed;
    spec.validate();

    sc.expected.push_back({Phase::armed, Phase::ringing, sc.alarm_time_ms, sc.alarm_time_ms});
    sc.expected_final_phase = Phase::ringing;

    // Walk the true onsets through the same smoothing/filter/streak rule to
    // find the beat at which a perfect detector would silence the alarm.
    const auto onsets = beat_onsets(spec);
    std::vector<double> recent;
    int streak = 0;
    for (std::size_t i = 1; i < onsets.size(); ++i) {
        recent.push_back(60000.0 / (onsets[i] - onsets[i - 1]));
        if (recent.size() > overrides.smoothing_window) recent.erase(recent.begin());
        if (onsets[i] < static_cast<double>(sc.alarm_time_ms)) continue;

        auto sorted = recent;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        const double med = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        const bool qualifying = med >= kPlausibleBand.low && med <= kPlausibleBand.high &&
                                sc.satisfaction_band.contains(med);
        streak = qualifying ? streak + 1 : 0;
        if (streak == overrides.required_streak) {
            const double ibi = 60000.0 / sc.exercise_bpm;
            const auto latest = static_cast<std::int64_t>(std::ceil(onsets[i] + spec.pulse_width_ms + ibi));
            const auto stop_at = static_cast<std::int64_t>(std::floor(onsets[i]));
            if (latest < spec.duration_ms) {
                sc.expected.push_back({Phase::ringing, Phase::stopped, stop_at, latest});
                sc.expected_final_phase = Phase::stopped;
            }
            break;
        }
    }
    return sc;
}

}  // namespace pulsealarm

#include "pulsealarm/physiology.hpp"

#include <algorithm>
#include <string>

#include "pulsealarm/errors.hpp"

namespace pulsealarm {

namespace {

void check_age(int age_years) {
    if (age_years < kMinAge || age_years > kMaxAge)
        throw DomainError("age " + std::to_string(age_years) + " outside [1, 120]");
}

// percent * value / 100 rounded half-up, in integers so that x.5 is exact.
int percent_round_half_up(int percent, int value) { return (percent * value + 50) / 100; }

}  // namespace

void UserProfile::validate() const {
    check_age(age_years);
    if (!(resting_bpm > 0.0) || resting_bpm >= max_heart_rate(age_years))
        throw DomainError("resting_bpm must lie in (0, 220 - age)");
}

int max_heart_rate(int age_years) {
    check_age(age_years);
    return 220 - age_years;
}

BpmBand moderate_exercise_band(int age_years) {
    const int max_hr = max_heart_rate(age_years);
    return {static_cast<double>(percent_round_half_up(50, max_hr)),
            static_cast<double>(percent_round_half_up(69, max_hr))};
}

BpmBand sleep_rate_range(double resting_bpm) {
    if (!(resting_bpm > 0.0)) throw DomainError("resting_bpm must be positive");
    return {resting_bpm * 0.90, resting_bpm * 0.92};
}

std::string_view to_string(BandMode mode) noexcept {
    return mode == BandMode::fixed ? "FIXED" : "AGE_DERIVED";
}

std::optional<BandMode> band_mode_from_string(std::string_view text) noexcept {
    if (text == "FIXED") return BandMode::fixed;
    if (text == "AGE_DERIVED") return BandMode::age_derived;
    return std::nullopt;
}

BpmBand satisfaction_band(const std::optional<UserProfile>& profile, BandMode mode) {
    if (mode == BandMode::fixed) return kFixedSatisfactionBand;
    if (!profile) throw ConfigError("AGE_DERIVED satisfaction band requires a user profile");
    const auto band = moderate_exercise_band(profile->age_years);
    return {std::max(band.low, kPlausibleBand.low), std::min(band.high, kPlausibleBand.high)};
}

}  // namespace pulsealarm

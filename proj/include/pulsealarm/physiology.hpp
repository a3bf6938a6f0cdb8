#pragma once

#include <optional>
#include <string_view>

namespace pulsealarm {

struct UserProfile {
    int age_years = 20;
    double resting_bpm = 90.0;

    // 1 <= age <= 120 and 0 < resting < 220 - age, else DomainError.
    void validate() const;
};

struct BpmBand {
    double low = 0.0;
    double high = 0.0;

    bool contains(double bpm) const noexcept { return bpm >= low && bpm <= high; }
    double midpoint() const noexcept { return 0.5 * (low + high); }

    friend bool operator==(const BpmBand&, const BpmBand&) = default;
};

inline constexpr int kMinAge = 1;
inline constexpr int kMaxAge = 120;

// Band that interrupts a ringing alarm on the reference device.
inline constexpr BpmBand kFixedSatisfactionBand{101.0, 199.0};
inline constexpr BpmBand kPlausibleBand{23.0, 200.0};

int max_heart_rate(int age_years);

// [50%, 69%] of max_heart_rate, each end rounded half-up to whole bpm.
BpmBand moderate_exercise_band(int age_years);

// Sleep depresses the rate by 8-10%: returns [0.90 r, 0.92 r].
BpmBand sleep_rate_range(double resting_bpm);

enum class BandMode { fixed, age_derived };

std::string_view to_string(BandMode mode) noexcept;
std::optional<BandMode> band_mode_from_string(std::string_view text) noexcept;

// FIXED ignores the profile. AGE_DERIVED needs one (ConfigError otherwise) and
// clips the moderate band to the plausible range.
BpmBand satisfaction_band(const std::optional<UserProfile>& profile, BandMode mode = BandMode::fixed);

}  // namespace pulsealarm

#pragma once

// Every tunable threshold lives here so the published constants (0.4
// opposition, 0.3 grab, 17 mm spread, 0.8-3.6 Hz, 2-7 s) stay visible and
// overridable from one file.

#include <cstdint>
#include <string>
#include <string_view>

namespace hge {

struct FeatureConfig {
    double facing_threshold = 0.4;          // |A + B| strictly below => facing
    double flat_grab_max = 0.3;             // inclusive
    double open_spread_min_mm = 17.0;       // inclusive
    double line_variance_min = 0.95;
    double circle_residual_max = 0.10;      // RMS residual / radius
    double circle_radius_min_mm = 5.0;
    double circle_radius_max_mm = 200.0;
    double stationary_path_min_mm = 10.0;
    double max_trajectory_window_s = 5.0;
    double frequency_min_peak_to_peak_mm = 5.0;
    double frequency_hysteresis_fraction = 0.25;  // of peak-to-peak
    double orientation_vote_fraction = 0.7;
    double parallel_resultant_min = 1.6;
    double stacked_angle_max_deg = 30.0;
    double min_window_s = 1.0;
    double min_hand_presence = 0.8;
};

struct DetectorConfig {
    double facing_dwell_s = 0.3;
    double not_facing_alert_s = 2.0;
    double approach_window_s = 0.5;
    double approach_slope_mm_s = -20.0;
    double contact_distance_mm = 30.0;
    double rotation_sweep_deg = 180.0;
    double min_rotation_speed_mm_s = 20.0;
    double max_rotation_step_deg = 60.0;
    double lost_hands_timeout_s = 1.0;
    double separation_confirm_s = 0.3;
    double rub_frequency_min_hz = 0.8;
    double rub_frequency_max_hz = 3.6;
    double rub_frequency_tolerance_hz = 0.1;
    double stage_duration_min_s = 2.0;
    double stage_duration_max_s = 7.0;
    double stage_duration_tolerance_s = 0.05;
};

enum class Aggregation { Mean, Median };

struct Config {
    std::int64_t merge_window_ms = 5;
    Aggregation aggregation = Aggregation::Mean;
    FeatureConfig features;
    DetectorConfig detector;
};

/// Throws Error(InvalidConfig) when a value is outside its documented range.
void validate(const Config& config);

/// Parses `key = value` lines over the defaults. Unknown keys are rejected.
Config parse_config(std::string_view text, std::string_view source = {});
Config load_config_file(const std::string& path);

/// Full key-value dump in a stable order; parse_config(dump_config(c)) == c.
std::string dump_config(const Config& config);

}  // namespace hge

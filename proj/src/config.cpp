#include "hge/config.hpp"

#include <functional>
#include <vector>

#include "hge/error.hpp"
#include "hge/frame_model.hpp"
#include "hge/kv_text.hpp"

namespace hge {
namespace {

struct Field {
    std::string_view key;
    std::function<double&(Config&)> ref;
    double min;
    double max;
};

#define HGE_FEATURE(name, lo, hi) \
    Field { #name, [](Config& c) -> double& { return c.features.name; }, lo, hi }
#define HGE_DETECTOR(name, lo, hi) \
    Field { #name, [](Config& c) -> double& { return c.detector.name; }, lo, hi }

const std::vector<Field>& fields() {
    static const std::vector<Field> table{
        HGE_FEATURE(facing_threshold, 0.0, 2.0),
        HGE_FEATURE(flat_grab_max, 0.0, 1.0),
        HGE_FEATURE(open_spread_min_mm, 0.0, 200.0),
        HGE_FEATURE(line_variance_min, 0.5, 1.0),
        HGE_FEATURE(circle_residual_max, 0.0, 1.0),
        HGE_FEATURE(circle_radius_min_mm, 0.0, 1000.0),
        HGE_FEATURE(circle_radius_max_mm, 0.0, 1000.0),
        HGE_FEATURE(stationary_path_min_mm, 0.0, 1000.0),
        HGE_FEATURE(max_trajectory_window_s, 0.25, 60.0),
        HGE_FEATURE(frequency_min_peak_to_peak_mm, 0.0, 1000.0),
        HGE_FEATURE(frequency_hysteresis_fraction, 0.0, 0.5),
        HGE_FEATURE(orientation_vote_fraction, 0.0, 1.0),
        HGE_FEATURE(parallel_resultant_min, 0.0, 2.0),
        HGE_FEATURE(stacked_angle_max_deg, 0.0, 90.0),
        HGE_FEATURE(min_window_s, 0.1, 60.0),
        HGE_FEATURE(min_hand_presence, 0.0, 1.0),
        HGE_DETECTOR(facing_dwell_s, 0.0, 10.0),
        HGE_DETECTOR(not_facing_alert_s, 0.0, 60.0),
        HGE_DETECTOR(approach_window_s, 0.05, 10.0),
        HGE_DETECTOR(approach_slope_mm_s, -10000.0, 0.0),
        HGE_DETECTOR(contact_distance_mm, 0.0, 500.0),
        HGE_DETECTOR(rotation_sweep_deg, 0.0, 3600.0),
        HGE_DETECTOR(min_rotation_speed_mm_s, 0.0, 10000.0),
        HGE_DETECTOR(max_rotation_step_deg, 1.0, 180.0),
        HGE_DETECTOR(lost_hands_timeout_s, 0.0, 60.0),
        HGE_DETECTOR(separation_confirm_s, 0.0, 10.0),
        HGE_DETECTOR(rub_frequency_min_hz, 0.0, 50.0),
        HGE_DETECTOR(rub_frequency_max_hz, 0.0, 50.0),
        HGE_DETECTOR(rub_frequency_tolerance_hz, 0.0, 5.0),
        HGE_DETECTOR(stage_duration_min_s, 0.0, 600.0),
        HGE_DETECTOR(stage_duration_max_s, 0.0, 600.0),
        HGE_DETECTOR(stage_duration_tolerance_s, 0.0, 10.0),
    };
    return table;
}

#undef HGE_FEATURE
#undef HGE_DETECTOR

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorKind::InvalidConfig, message); }

}  // namespace

void validate(const Config& config) {
    Config copy = config;
    for (const auto& f : fields()) {
        const double v = f.ref(copy);
        if (!(v >= f.min && v <= f.max)) {
            invalid(std::string(f.key) + " = " + format_double(v) + " outside [" + format_double(f.min) + ", " +
                    format_double(f.max) + "]");
        }
    }
    if (config.merge_window_ms < 0 || config.merge_window_ms > 100) {
        invalid("merge_window_ms outside [0, 100]");
    }
    const auto& fc = config.features;
    const auto& dc = config.detector;
    if (fc.circle_radius_min_mm > fc.circle_radius_max_mm) {
        invalid("circle_radius_min_mm > circle_radius_max_mm");
    }
    if (dc.rub_frequency_min_hz > dc.rub_frequency_max_hz) {
        invalid("rub_frequency_min_hz > rub_frequency_max_hz");
    }
    if (dc.stage_duration_min_s > dc.stage_duration_max_s) {
        invalid("stage_duration_min_s > stage_duration_max_s");
    }
}

Config parse_config(std::string_view text, std::string_view source) {
    Config config;
    for (const auto& kv : parse_kv(text, source)) {
        try {
            if (kv.key == "merge_window_ms") {
                config.merge_window_ms = parse_int(kv.value, kv.key);
                continue;
            }
            if (kv.key == "aggregation") {
                if (kv.value == "mean") {
                    config.aggregation = Aggregation::Mean;
                } else if (kv.value == "median") {
                    config.aggregation = Aggregation::Median;
                } else {
                    invalid("aggregation must be 'mean' or 'median'");
                }
                continue;
            }
            bool found = false;
            for (const auto& f : fields()) {
                if (f.key == kv.key) {
                    f.ref(config) = parse_double(kv.value, kv.key);
                    found = true;
                    break;
                }
            }
            if (!found) {
                invalid("unknown key '" + kv.key + "'");
            }
        } catch (const Error& e) {
            Error wrapped(ErrorKind::InvalidConfig, e.message());
            wrapped.at_line(kv.line);
            if (!source.empty()) {
                wrapped.in_source(std::string(source));
            }
            throw wrapped;
        }
    }
    validate(config);
    return config;
}

Config load_config_file(const std::string& path) { return parse_config(read_file(path), path); }

std::string dump_config(const Config& config) {
    Config copy = config;
    std::string out;
    out += "merge_window_ms = " + std::to_string(config.merge_window_ms) + "\n";
    out += std::string("aggregation = ") + (config.aggregation == Aggregation::Mean ? "mean" : "median") + "\n";
    for (const auto& f : fields()) {
        out += std::string(f.key) + " = " + format_double(f.ref(copy)) + "\n";
    }
    return out;
}

}  // namespace hge

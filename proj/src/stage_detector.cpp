#include "hge/stage_detector.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"

#include "hge/error.hpp"

namespace hge {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::AwaitingTwoHands: return "AwaitingTwoHands";
        case Phase::PalmsFacing: return "PalmsFacing";
        case Phase::Approaching: return "Approaching";
        case Phase::ContactOccluded: return "ContactOccluded";
        case Phase::Rubbing: return "Rubbing";
        case Phase::Completed: return "Completed";
        case Phase::Failed: return "Failed";
    }
    return "Unknown";
}

std::string_view to_string(AlertKind a) {
    switch (a) {
        case AlertKind::PalmsNotFacing: return "PalmsNotFacing";
        case AlertKind::HandsLost: return "HandsLost";
        case AlertKind::NoRotation: return "NoRotation";
        case AlertKind::RubFrequencyOutOfRange: return "RubFrequencyOutOfRange";
        case AlertKind::RubTooShort: return "RubTooShort";
        case AlertKind::RubTooLong: return "RubTooLong";
        case AlertKind::StreamEnded: return "StreamEnded";
    }
    return "Unknown";
}

namespace {

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::int64_t to_ms(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1000.0)); }

double to_s(std::int64_t ms) { return static_cast<double>(ms) / 1000.0; }

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

std::string Event::to_line() const {
    std::string token = std::visit([](auto v) { return std::string(to_string(v)); }, subject);
    return std::to_string(timestamp_ms) + " " + token + " " + (detail.empty() ? "-" : detail);
}

Stage2Detector::Stage2Detector(DetectorConfig detector, FeatureConfig features)
    : config_(detector), features_(features) {}

void Stage2Detector::enter(Phase next, std::int64_t t, std::string detail, std::vector<Event>& events) {
    if (!timeline_.empty()) {
        timeline_.back().end_ms = t;
    }
    if (next != Phase::Completed && next != Phase::Failed) {
        timeline_.push_back({next, t, t});
    }
    state_.phase = next;
    state_.phase_entry_time_ms = t;
    Event e{t, next, std::move(detail)};
    events.push_back(e);
    events_.push_back(std::move(e));
}

void Stage2Detector::alert(AlertKind kind, std::int64_t t, std::string detail, std::vector<Event>& events) {
    state_.alert_log.push_back({t, kind});
    Event e{t, kind, std::move(detail)};
    events.push_back(e);
    events_.push_back(std::move(e));
}

void Stage2Detector::fail(AlertKind reason, std::int64_t t, std::string detail, std::vector<Event>& events) {
    alert(reason, t, std::move(detail), events);
    failure_ = reason;
    enter(Phase::Failed, t, "reason=" + std::string(to_string(reason)), events);
}

void Stage2Detector::check_lost(bool two_hands, std::int64_t t, std::vector<Event>& events) {
    if (two_hands || !seen_two_hands_) {
        lost_since_.reset();
        return;
    }
    if (!lost_since_) {
        lost_since_ = t;
    }
    if (t - *lost_since_ > to_ms(config_.lost_hands_timeout_s)) {
        fail(AlertKind::HandsLost, t, "lost_s=" + fixed(to_s(t - *lost_since_)), events);
    }
}

std::optional<double> Stage2Detector::approach_slope(std::int64_t t) const {
    const auto window = to_ms(config_.approach_window_s);
    if (distances_.size() < 5 || static_cast<double>(t - distances_.front().first) < 0.8 * static_cast<double>(window)) {
        return std::nullopt;
    }
    // Least-squares slope of distance against time, in mm/s.
    const double n = static_cast<double>(distances_.size());
    double st = 0.0;
    double sd = 0.0;
    for (const auto& [ts, d] : distances_) {
        st += to_s(ts - t);
        sd += d;
    }
    const double mt = st / n;
    const double md = sd / n;
    double num = 0.0;
    double den = 0.0;
    for (const auto& [ts, d] : distances_) {
        const double dt = to_s(ts - t) - mt;
        num += dt * (d - md);
        den += dt * dt;
    }
    if (den <= 0.0) {
        return std::nullopt;
    }
    return num / den;
}

std::vector<Event> Stage2Detector::step(const Frame& frame) {
    const auto t = frame.timestamp_ms;
    if (last_ts_ && t <= *last_ts_) {
        throw Error(ErrorKind::OutOfOrderFrame,
                    "frame at " + std::to_string(t) + " ms after " + std::to_string(*last_ts_) + " ms");
    }
    last_ts_ = t;
    std::vector<Event> events;
    if (terminal()) {
        return events;
    }
    ++frames_;
    if (timeline_.empty()) {
        enter(Phase::AwaitingTwoHands, t, "start", events);
    }

    const auto* left = frame.left();
    const auto* right = frame.right();
    const bool two = left && right;
    if (two) {
        const double d = inter_palm_distance(left->palm_position, right->palm_position);
        state_.last_inter_palm_distance_mm = d;
        distances_.emplace_back(t, d);
        seen_two_hands_ = true;
    }
    while (!distances_.empty() && distances_.front().first < t - to_ms(config_.approach_window_s)) {
        distances_.pop_front();
    }

    switch (state_.phase) {
        case Phase::AwaitingTwoHands: {
            if (two) {
                const auto opp = palm_opposition(left->palm_normal, right->palm_normal, features_.facing_threshold);
                if (opp.facing) {
                    not_facing_since_.reset();
                    not_facing_alerted_ = false;
                    if (!facing_since_) {
                        facing_since_ = t;
                    }
                    if (t - *facing_since_ >= to_ms(config_.facing_dwell_s)) {
                        enter(Phase::PalmsFacing, t, "resultant=" + fixed(opp.resultant_magnitude), events);
                    }
                } else {
                    facing_since_.reset();
                    if (!not_facing_since_) {
                        not_facing_since_ = t;
                    }
                    if (!not_facing_alerted_ && t - *not_facing_since_ >= to_ms(config_.not_facing_alert_s)) {
                        alert(AlertKind::PalmsNotFacing, t, "resultant=" + fixed(opp.resultant_magnitude), events);
                        not_facing_alerted_ = true;
                    }
                }
            } else {
                facing_since_.reset();
                not_facing_since_.reset();
                not_facing_alerted_ = false;
            }
            if (state_.phase == Phase::AwaitingTwoHands) {
                check_lost(two, t, events);
            }
            break;
        }
        case Phase::PalmsFacing: {
            if (two) {
                if (const auto slope = approach_slope(t); slope && *slope <= config_.approach_slope_mm_s) {
                    enter(Phase::Approaching, t, "slope_mm_s=" + fixed(*slope, 1), events);
                    break;
                }
            }
            check_lost(two, t, events);
            break;
        }
        case Phase::Approaching: {
            const bool contact = frame.hand_count() == 1 && prev_two_hands_ && state_.last_inter_palm_distance_mm &&
                                 *state_.last_inter_palm_distance_mm < config_.contact_distance_mm;
            if (contact) {
                survivor_ = frame.hands.front().handedness;
                state_.rub_start_time_ms = t;
                lost_since_.reset();
                enter(Phase::ContactOccluded, t,
                      "distance_mm=" + fixed(*state_.last_inter_palm_distance_mm, 1) + " survivor=" +
                          std::string(to_string(survivor_)),
                      events);
                contact_step(frame, events);
                break;
            }
            check_lost(two, t, events);
            break;
        }
        case Phase::ContactOccluded:
        case Phase::Rubbing:
            contact_step(frame, events);
            break;
        case Phase::Completed:
        case Phase::Failed:
            break;
    }
    prev_two_hands_ = two;
    if (!timeline_.empty() && !terminal()) {
        timeline_.back().end_ms = t;
    }
    return events;
}

void Stage2Detector::update_rotation(const Vec3& velocity) {
    const double speed = velocity.norm();
    if (speed < config_.min_rotation_speed_mm_s) {
        return;
    }
    const Vec3 dir = velocity / speed;
    if (prev_direction_) {
        const Vec3 axis = prev_direction_->cross(dir);
        const double turn = std::atan2(axis.norm(), prev_direction_->dot(dir));
        // Direction reversals of back-and-forth motion are not rotation.
        if (turn * kRadToDeg <= config_.max_rotation_step_deg && axis.norm() > 0.0) {
            rotation_ += turn * axis.normalized();
        }
    }
    prev_direction_ = dir;
    state_.accumulated_rotation_deg = rotation_.norm() * kRadToDeg;
}

void Stage2Detector::contact_step(const Frame& frame, std::vector<Event>& events) {
    const auto t = frame.timestamp_ms;
    const auto* survivor = frame.find(survivor_);
    const bool alone = survivor && frame.hand_count() == 1;

    if (alone) {
        missing_since_.reset();
        separated_since_.reset();
        last_contact_ts_ = t;
        rub_positions_.push_back(survivor->palm_position);
        rub_times_.push_back(t);
        update_rotation(survivor->palm_velocity);
        if (state_.phase == Phase::ContactOccluded &&
            state_.accumulated_rotation_deg >= config_.rotation_sweep_deg) {
            enter(Phase::Rubbing, t, "sweep_deg=" + fixed(state_.accumulated_rotation_deg, 1), events);
        }
    } else if (frame.hand_count() == 2) {
        if (!separated_since_) {
            separated_since_ = t;
        }
        if (t - *separated_since_ >= to_ms(config_.separation_confirm_s)) {
            resolve_rub(*last_contact_ts_, events);
            return;
        }
    } else {
        if (!missing_since_) {
            missing_since_ = t;
        }
        if (t - *missing_since_ > to_ms(config_.lost_hands_timeout_s)) {
            resolve_rub(*last_contact_ts_, events);
            return;
        }
    }

    const auto limit = to_ms(config_.stage_duration_max_s + config_.stage_duration_tolerance_s);
    if (t - *state_.rub_start_time_ms > limit) {
        fail(AlertKind::RubTooLong, t, "elapsed_s=" + fixed(to_s(t - *state_.rub_start_time_ms)), events);
    }
}

void Stage2Detector::resolve_rub(std::int64_t t_end, std::vector<Event>& events) {
    if (state_.phase == Phase::ContactOccluded) {
        fail(AlertKind::NoRotation, t_end, "sweep_deg=" + fixed(state_.accumulated_rotation_deg, 1), events);
        return;
    }
    const double elapsed = to_s(t_end - *state_.rub_start_time_ms);
    std::optional<double> freq;
    try {
        freq = estimate_frequency(rub_positions_, rub_times_, features_);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::TooFewSamples) {
            throw;
        }
    }
    const double ftol = config_.rub_frequency_tolerance_hz;
    const double dtol = config_.stage_duration_tolerance_s;
    const bool freq_ok =
        freq && *freq >= config_.rub_frequency_min_hz - ftol && *freq <= config_.rub_frequency_max_hz + ftol;
    const std::string detail = "elapsed_s=" + fixed(elapsed) + " frequency_hz=" + (freq ? fixed(*freq) : "none");

    if (elapsed < config_.stage_duration_min_s - dtol) {
        fail(AlertKind::RubTooShort, t_end, detail, events);
    } else if (elapsed > config_.stage_duration_max_s + dtol) {
        fail(AlertKind::RubTooLong, t_end, detail, events);
    } else if (!freq_ok) {
        fail(AlertKind::RubFrequencyOutOfRange, t_end, detail, events);
    } else {
        completion_frequency_ = freq;
        stage_duration_ = elapsed;
        enter(Phase::Completed, t_end, "duration_s=" + fixed(elapsed) + " frequency_hz=" + fixed(*freq), events);
    }
}

std::vector<Event> Stage2Detector::finish() {
    std::vector<Event> events;
    if (terminal()) {
        return events;
    }
    if ((state_.phase == Phase::ContactOccluded || state_.phase == Phase::Rubbing) && last_contact_ts_) {
        resolve_rub(*last_contact_ts_, events);
    } else {
        fail(AlertKind::StreamEnded, last_ts_.value_or(0), "phase=" + std::string(to_string(state_.phase)), events);
    }
    return events;
}

StageReport Stage2Detector::report() const {
    StageReport r;
    r.verdict = state_.phase == Phase::Completed ? Verdict::Completed : Verdict::NotCompleted;
    r.phase_timeline = timeline_;
    r.stage_duration_s = stage_duration_;
    if (state_.phase == Phase::Completed) {
        r.completion_time_ms = state_.phase_entry_time_ms;
    }
    r.rub_frequency_hz = completion_frequency_;
    r.failure = failure_;
    r.alerts = state_.alert_log;
    r.events = events_;
    r.frames_processed = frames_;
    return r;
}

StageReport detect_stage2(const FrameStream& stream, const DetectorConfig& detector, const FeatureConfig& features) {
    Stage2Detector det(detector, features);
    for (std::size_t i = 0; i < stream.frames.size(); ++i) {
        try {
            det.step(validate_frame(stream.frames[i]));
        } catch (Error& e) {
            e.at_frame(i);
            throw;
        }
        if (det.terminal()) {
            break;
        }
    }
    det.finish();
    return det.report();
}

std::string events_to_text(const std::vector<Event>& events) {
    std::string out;
    for (const auto& e : events) {
        out += e.to_line();
        out += '\n';
    }
    return out;
}

std::string report_to_text(const StageReport& report) {
    nlohmann::ordered_json j;
    j["verdict"] = report.verdict == Verdict::Completed ? "Completed" : "NotCompleted";
    j["stage_duration_s"] = report.stage_duration_s ? nlohmann::ordered_json(*report.stage_duration_s) : nullptr;
    j["completion_time_ms"] =
        report.completion_time_ms ? nlohmann::ordered_json(*report.completion_time_ms) : nullptr;
    j["rub_frequency_hz"] = report.rub_frequency_hz ? nlohmann::ordered_json(*report.rub_frequency_hz) : nullptr;
    j["failure"] = report.failure ? nlohmann::ordered_json(std::string(to_string(*report.failure))) : nullptr;
    j["frames_processed"] = report.frames_processed;
    auto timeline = nlohmann::ordered_json::array();
    for (const auto& p : report.phase_timeline) {
        nlohmann::ordered_json item;
        item["phase"] = std::string(to_string(p.phase));
        item["start_ms"] = p.start_ms;
        item["end_ms"] = p.end_ms;
        timeline.push_back(std::move(item));
    }
    j["phase_timeline"] = std::move(timeline);
    auto alerts = nlohmann::ordered_json::array();
    for (const auto& a : report.alerts) {
        nlohmann::ordered_json item;
        item["timestamp_ms"] = a.timestamp_ms;
        item["kind"] = std::string(to_string(a.kind));
        alerts.push_back(std::move(item));
    }
    j["alerts"] = std::move(alerts);
    return j.dump(2) + "\n";
}

}  // namespace hge

#pragma once

// Sequential detector for "rub hands palm to palm".
//
//   AwaitingTwoHands -> PalmsFacing -> Approaching -> ContactOccluded
//                    -> Rubbing -> Completed
//
// Failed is reachable from every non-terminal phase and is final for the
// run. Contact is inferred from occlusion: when the palms meet the tracker
// loses one hand, and the rub is judged from the surviving hand alone.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hge/config.hpp"
#include "hge/features.hpp"
#include "hge/frame_model.hpp"

namespace hge {

enum class Phase { AwaitingTwoHands, PalmsFacing, Approaching, ContactOccluded, Rubbing, Completed, Failed };

enum class AlertKind {
    PalmsNotFacing,
    HandsLost,
    NoRotation,
    RubFrequencyOutOfRange,
    RubTooShort,
    RubTooLong,
    StreamEnded,
};

std::string_view to_string(Phase p);
std::string_view to_string(AlertKind a);

struct Alert {
    std::int64_t timestamp_ms{0};
    AlertKind kind{AlertKind::PalmsNotFacing};
    friend bool operator==(const Alert&, const Alert&) = default;
};

/// One line of the event stream: `timestamp_ms phase_or_alert detail`.
struct Event {
    std::int64_t timestamp_ms{0};
    std::variant<Phase, AlertKind> subject;
    std::string detail;

    [[nodiscard]] bool is_alert() const noexcept { return std::holds_alternative<AlertKind>(subject); }
    [[nodiscard]] std::string to_line() const;
};

struct PhaseInterval {
    Phase phase{Phase::AwaitingTwoHands};
    std::int64_t start_ms{0};
    std::int64_t end_ms{0};
    friend bool operator==(const PhaseInterval&, const PhaseInterval&) = default;
};

struct DetectorState {
    Phase phase{Phase::AwaitingTwoHands};
    std::int64_t phase_entry_time_ms{0};
    std::optional<double> last_inter_palm_distance_mm;
    double accumulated_rotation_deg{0.0};
    std::optional<std::int64_t> rub_start_time_ms;  // ContactOccluded entry
    std::vector<Alert> alert_log;
};

enum class Verdict { Completed, NotCompleted };

struct StageReport {
    Verdict verdict{Verdict::NotCompleted};
    /// Phases visited before the run terminated; contiguous.
    std::vector<PhaseInterval> phase_timeline;
    std::optional<double> stage_duration_s;  // contact -> completion
    std::optional<std::int64_t> completion_time_ms;
    std::optional<double> rub_frequency_hz;
    std::optional<AlertKind> failure;
    std::vector<Alert> alerts;
    std::vector<Event> events;
    std::size_t frames_processed{0};
};

class Stage2Detector {
public:
    explicit Stage2Detector(DetectorConfig detector = {}, FeatureConfig features = {});

    /// Advances by one frame. Throws Error(OutOfOrderFrame) unless the
    /// timestamp is strictly later than the previous one. Frames after a
    /// terminal phase are ignored.
    std::vector<Event> step(const Frame& frame);

    /// Signals end of stream; resolves a pending rub or fails the run.
    std::vector<Event> finish();

    [[nodiscard]] const DetectorState& state() const noexcept { return state_; }
    [[nodiscard]] bool terminal() const noexcept {
        return state_.phase == Phase::Completed || state_.phase == Phase::Failed;
    }
    [[nodiscard]] StageReport report() const;

private:
    void enter(Phase next, std::int64_t t, std::string detail, std::vector<Event>& events);
    void alert(AlertKind kind, std::int64_t t, std::string detail, std::vector<Event>& events);
    void fail(AlertKind reason, std::int64_t t, std::string detail, std::vector<Event>& events);
    void check_lost(bool two_hands, std::int64_t t, std::vector<Event>& events);
    std::optional<double> approach_slope(std::int64_t t) const;
    void contact_step(const Frame& frame, std::vector<Event>& events);
    void update_rotation(const Vec3& velocity);
    void resolve_rub(std::int64_t t_end, std::vector<Event>& events);

    DetectorConfig config_;
    FeatureConfig features_;
    DetectorState state_;
    std::vector<PhaseInterval> timeline_;
    std::vector<Event> events_;
    std::size_t frames_{0};

    std::optional<std::int64_t> last_ts_;
    bool seen_two_hands_{false};
    bool prev_two_hands_{false};
    std::optional<std::int64_t> facing_since_;
    std::optional<std::int64_t> not_facing_since_;
    bool not_facing_alerted_{false};
    std::optional<std::int64_t> lost_since_;
    std::deque<std::pair<std::int64_t, double>> distances_;

    // Contact phase bookkeeping.
    Handedness survivor_{Handedness::Right};
    std::vector<Vec3> rub_positions_;
    std::vector<std::int64_t> rub_times_;
    std::optional<std::int64_t> last_contact_ts_;
    std::optional<std::int64_t> missing_since_;
    std::optional<std::int64_t> separated_since_;
    std::optional<Vec3> prev_direction_;
    Vec3 rotation_{Vec3::Zero()};  // sum of signed turning angles (rad) about each turn axis

    std::optional<double> completion_frequency_;
    std::optional<double> stage_duration_;
    std::optional<AlertKind> failure_;
};

/// Validates each frame and folds the detector over the stream. Frame
/// errors carry the offending frame index.
StageReport detect_stage2(const FrameStream& stream, const DetectorConfig& detector = {},
                          const FeatureConfig& features = {});

std::string events_to_text(const std::vector<Event>& events);

/// Structured report, one key per line, stable key order.
std::string report_to_text(const StageReport& report);

}  // namespace hge

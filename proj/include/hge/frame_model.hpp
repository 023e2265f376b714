#pragma once

// Frame-stream data model and the per-hand CSV format.
//
// Coordinates follow the tracker convention: right-handed, origin at the
// sensor, y up away from the sensor, millimetres. Not enforced.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hge {

using Vec3 = Eigen::Vector3d;

enum class Handedness { Left, Right };

std::string_view to_string(Handedness h);

inline constexpr std::size_t kFingerCount = 5;
inline constexpr std::array<std::string_view, kFingerCount> kFingerNames{
    "thumb", "index", "middle", "ring", "pinky"};

/// One tracked hand in one frame. Fingertips are ordered thumb..pinky;
/// an empty slot means the finger was not tracked.
struct HandObservation {
    Handedness handedness{Handedness::Right};
    Vec3 palm_position{Vec3::Zero()};
    Vec3 palm_normal{0.0, -1.0, 0.0};
    Vec3 palm_velocity{Vec3::Zero()};
    double grab_strength{0.0};
    std::array<std::optional<Vec3>, kFingerCount> fingertips{};
};

struct Frame {
    std::int64_t timestamp_ms{0};
    std::vector<HandObservation> hands;

    [[nodiscard]] std::size_t hand_count() const noexcept { return hands.size(); }
    [[nodiscard]] const HandObservation* find(Handedness h) const noexcept;
    [[nodiscard]] const HandObservation* left() const noexcept { return find(Handedness::Left); }
    [[nodiscard]] const HandObservation* right() const noexcept { return find(Handedness::Right); }
};

struct FrameStream {
    std::vector<Frame> frames;
    /// Estimated from timestamps when parsed; 0 when fewer than two frames.
    double nominal_fps{0.0};
};

/// A per-hand record as stored in one CSV file.
struct TimedHand {
    std::int64_t timestamp_ms{0};
    HandObservation hand;
};

inline constexpr double kNormalTolerance = 1e-3;
inline constexpr std::int64_t kDefaultMergeWindowMs = 5;

/// Checks a single observation; renormalizes a near-unit palm normal.
HandObservation validate_hand(HandObservation hand);

/// Checks every frame invariant. Near-unit normals (within 1e-3) are
/// renormalized; anything further off is rejected.
Frame validate_frame(Frame raw);

/// Aligns two per-hand record sequences into frames. Records closer than
/// `window_ms` (inclusive) share a frame stamped with the left timestamp.
FrameStream merge_hand_streams(std::span<const TimedHand> left,
                               std::span<const TimedHand> right,
                               std::int64_t window_ms = kDefaultMergeWindowMs);

/// (frames - 1) / span; 0 if the span is empty.
double estimate_fps(std::span<const Frame> frames);

/// The 26-column header shared by both per-hand files.
const std::string& csv_header();

/// Parses one per-hand CSV file. `source` names the file in errors.
std::vector<TimedHand> parse_hand_csv(std::string_view text, Handedness hand,
                                      std::string_view source = {});

FrameStream parse_csv_stream(std::string_view left_text, std::string_view right_text,
                             std::int64_t merge_window_ms = kDefaultMergeWindowMs);

struct CsvPair {
    std::string left;
    std::string right;
};

CsvPair write_csv_stream(const FrameStream& stream);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace hge

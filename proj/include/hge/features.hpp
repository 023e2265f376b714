#pragma once

// Per-frame and windowed hand-hygiene feature extractors. Everything here is
// a pure function of its arguments.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hge/config.hpp"
#include "hge/frame_model.hpp"

namespace hge {

// --- palm orientation -------------------------------------------------------

struct OppositionResult {
    double resultant_magnitude{0.0};  // |A + B|, in [0, 2]
    bool facing{false};               // resultant_magnitude < threshold
};

/// Sum of the two palm normals. Palms face each other when the normals
/// cancel, i.e. the resultant is short.
OppositionResult palm_opposition(const Vec3& normal_left, const Vec3& normal_right, double threshold = 0.4);

// --- palm shape -------------------------------------------------------------

enum class PalmShape { Flat, Curved };

/// Flat iff grab_strength <= flat_max.
PalmShape classify_palm_shape(double grab_strength, double flat_max = 0.3);

// --- finger spread ----------------------------------------------------------

enum class FingerSpread { Open, Closed, Unknown };

struct SpreadResult {
    std::optional<double> min_adjacent_distance_mm;
    FingerSpread spread{FingerSpread::Unknown};
};

/// Minimum distance over adjacent tracked fingertip pairs (thumb-index,
/// index-middle, ...). Fewer than two such pairs gives Unknown.
SpreadResult finger_spread(const std::array<std::optional<Vec3>, kFingerCount>& fingertips,
                           double open_min_mm = 17.0);

double inter_palm_distance(const Vec3& palm_left, const Vec3& palm_right);

// --- trajectory -------------------------------------------------------------

enum class Trajectory { Linear, Circular, Indeterminate };

/// Eigen-decomposition of the positional covariance, largest axis first.
struct PrincipalAxes {
    Vec3 centroid{Vec3::Zero()};
    Vec3 variances{Vec3::Zero()};
    std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
};

PrincipalAxes principal_axes(std::span<const Vec3> points);

struct TrajectoryFit {
    double path_length_mm{0.0};
    double line_variance_fraction{0.0};
    std::optional<double> circle_radius_mm;
    std::optional<double> circle_rms_residual_mm;
};

/// Line and in-plane circle fits behind classify_trajectory.
TrajectoryFit fit_trajectory(std::span<const Vec3> positions);

Trajectory classify_trajectory(std::span<const Vec3> positions, double window_span_s,
                               const FeatureConfig& config = {});

// --- frequency --------------------------------------------------------------

/// Dominant oscillation frequency along the principal axis from zero
/// crossings of the mean-removed signal. Absent when the peak-to-peak
/// excursion is below the configured floor.
std::optional<double> estimate_frequency(std::span<const Vec3> positions,
                                         std::span<const std::int64_t> timestamps_ms,
                                         const FeatureConfig& config = {});

// --- windowed summary -------------------------------------------------------

enum class PalmOrientation { FacingEachOther, OnePalmOverOther, Other };

struct FeatureVector {
    PalmOrientation palm_orientation{PalmOrientation::Other};
    std::optional<PalmShape> palm_shape_left;   // absent when the hand never appears
    std::optional<PalmShape> palm_shape_right;
    FingerSpread finger_spread_left{FingerSpread::Unknown};
    FingerSpread finger_spread_right{FingerSpread::Unknown};
    Trajectory trajectory{Trajectory::Indeterminate};
    std::optional<double> movement_frequency_hz;
    std::optional<double> inter_palm_distance_mm;
    double window_span_s{0.0};
};

FeatureVector extract_feature_vector(std::span<const Frame> window, const FeatureConfig& config = {});

// --- stage signatures -------------------------------------------------------

enum class StageId { Stage2, Stage3 };

struct Interval {
    double min{0.0};
    double max{0.0};
    [[nodiscard]] bool contains(double v) const noexcept { return v >= min && v <= max; }
};

struct StageSignature {
    StageId stage{StageId::Stage2};
    PalmOrientation orientation{PalmOrientation::FacingEachOther};
    PalmShape shape{PalmShape::Flat};
    FingerSpread spread{FingerSpread::Closed};
    std::vector<Trajectory> trajectories;
    Interval frequency_hz;
    Interval duration_s;

    /// Which features separate this stage from its neighbours.
    struct Discriminative {
        bool orientation{false};
        bool shape{false};
        bool spread{false};
        bool trajectory{false};
        bool frequency{false};
        bool duration{false};
    } discriminative;
};

/// Rub hands palm to palm.
const StageSignature& stage2_signature();
/// Right palm over left dorsum (and vice versa).
const StageSignature& stage3_signature();

struct SignatureMatch {
    bool match{false};
    double score{0.0};  // fraction of discriminative features satisfied
};

SignatureMatch match_signature(const FeatureVector& v, const StageSignature& s);

std::string_view to_string(PalmShape v);
std::string_view to_string(FingerSpread v);
std::string_view to_string(Trajectory v);
std::string_view to_string(PalmOrientation v);
std::string_view to_string(StageId v);

}  // namespace hge

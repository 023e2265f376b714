#pragma once

// Ground-truth-labelled synthetic hand streams. Deterministic for a given
// seed; used as the reference oracle for extractor and detector tests.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hge/frame_model.hpp"

namespace hge {

enum class PhaseKind { Idle, FacingHold, Approach, RubCircular, Stage3Linear, Primitive };
enum class PrimitiveKind { Sinusoid1D, Circle, Line, Static };
enum class OcclusionModel { None, DropOneHandOnContact };

std::string_view to_string(PhaseKind k);
std::string_view to_string(PrimitiveKind k);

struct PhaseSpec {
    PhaseKind kind{PhaseKind::Idle};
    double duration_s{1.0};
    double rub_frequency_hz{2.0};
    double rub_radius_mm{25.0};  // circle radius, or stroke amplitude for linear motion
    std::optional<double> approach_speed_mm_s;   // default: reach contact at phase end
    std::optional<double> start_separation_mm;   // default: carried over from the previous phase
    bool palms_facing{true};                     // FacingHold / Approach normals
    PrimitiveKind primitive{PrimitiveKind::Sinusoid1D};
};

struct GestureScript {
    std::vector<PhaseSpec> phases;
    double fps{100.0};
    double noise_sigma_mm{0.0};
    OcclusionModel occlusion{OcclusionModel::DropOneHandOnContact};
    Handedness survivor{Handedness::Right};
    double start_separation_mm{150.0};
    double contact_separation_mm{20.0};  // palm-centre distance with palms touching
    double palm_height_mm{200.0};
    std::uint64_t seed{0};
};

/// Hands closer than this are treated as touching and one is occluded.
inline constexpr double kOcclusionSeparationMm = 30.0;
inline constexpr double kClosedFingerSpacingMm = 10.0;
inline constexpr double kOpenFingerSpacingMm = 20.0;
inline constexpr double kFlatGrab = 0.1;

struct FrameLabel {
    PhaseKind kind{PhaseKind::Idle};
    std::size_t phase_index{0};
    friend bool operator==(const FrameLabel&, const FrameLabel&) = default;
};

struct LabeledStream {
    FrameStream stream;
    std::vector<FrameLabel> labels;  // one per frame
};

void validate_script(const GestureScript& script);

LabeledStream generate(const GestureScript& script);

struct AddNoise {
    double sigma_mm{0.0};
    std::uint64_t seed{0};
};
struct RemovePhaseFrames {
    PhaseKind phase{PhaseKind::Approach};
};
struct SuppressOcclusion {};
struct DropFrames {
    double rate{0.0};
    std::uint64_t seed{0};
};
using Perturbation = std::variant<AddNoise, RemovePhaseFrames, SuppressOcclusion, DropFrames>;

LabeledStream perturb(const LabeledStream& input, const Perturbation& perturbation);

struct PrimitiveParams {
    double fps{100.0};
    double duration_s{1.0};
    std::optional<std::size_t> samples;  // overrides duration when set
    double frequency_hz{1.0};
    double amplitude_mm{50.0};  // sinusoid amplitude, circle radius, half line length
    Vec3 center{0.0, 200.0, 0.0};
    Vec3 axis{1.0, 0.0, 0.0};          // sinusoid and line direction, circle first in-plane axis
    Vec3 plane_normal{0.0, 0.0, 1.0};  // circle plane
    double phase_rad{0.0};
};

struct PrimitiveTrace {
    std::vector<Vec3> positions;
    std::vector<std::int64_t> timestamps_ms;
};

PrimitiveTrace generate_primitive(PrimitiveKind kind, const PrimitiveParams& params);

/// facing hold 1 s, approach 1 s from 150 mm, circular rub.
GestureScript canonical_stage2_script(double rub_frequency_hz = 2.0, double rub_duration_s = 3.0,
                                      double noise_sigma_mm = 0.0, std::uint64_t seed = 0);

/// Right palm stroking linearly over the left dorsum with fingers open.
GestureScript stage3_script(double frequency_hz = 2.0, double duration_s = 3.0, double noise_sigma_mm = 0.0,
                            std::uint64_t seed = 0);

GestureScript parse_script(std::string_view text, std::string_view source = {});
std::string script_to_text(const GestureScript& script);

}  // namespace hge

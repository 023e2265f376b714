#include "doctest.h"

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "hge/error.hpp"
#include "hge/features.hpp"
#include "hge/synth.hpp"

using namespace hge;

namespace {

std::array<std::optional<Vec3>, kFingerCount> tips_along_x(double spacing) {
    std::array<std::optional<Vec3>, kFingerCount> t;
    for (std::size_t k = 0; k < kFingerCount; ++k) {
        t[k] = Vec3(spacing * static_cast<double>(k), 0.0, 0.0);
    }
    return t;
}

std::vector<Frame> phase_frames(const LabeledStream& s, PhaseKind kind) {
    std::vector<Frame> out;
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
        if (s.labels[i].kind == kind) {
            out.push_back(s.stream.frames[i]);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("opposition: exact, parallel and slightly tilted palms") {
    auto r = palm_opposition({0, 1, 0}, {0, -1, 0});
    CHECK(r.resultant_magnitude == 0.0);
    CHECK(r.facing);

    r = palm_opposition({0, 1, 0}, {0, 1, 0});
    CHECK(r.resultant_magnitude == doctest::Approx(2.0));
    CHECK_FALSE(r.facing);

    r = palm_opposition({std::sin(0.2), std::cos(0.2), 0}, {0, -1, 0});
    const double chord = 2.0 * std::sin(0.2 / 2.0);
    CHECK(r.resultant_magnitude == doctest::Approx(chord).epsilon(1e-12));
    CHECK(r.resultant_magnitude == doctest::Approx(0.1997).epsilon(1e-4));
    CHECK(r.facing);
}

TEST_CASE("opposition rejects non-unit normals") {
    CHECK_THROWS_AS(palm_opposition({0, 2, 0}, {0, -1, 0}), Error);
    CHECK_THROWS_AS(palm_opposition({0, 1, 0}, {0, 0, 0}), Error);
}

TEST_CASE("palm shape: 0 flat, 1 curved, 0.3 inclusive flat") {
    CHECK(classify_palm_shape(0.0) == PalmShape::Flat);
    CHECK(classify_palm_shape(1.0) == PalmShape::Curved);
    CHECK(classify_palm_shape(0.3) == PalmShape::Flat);
    CHECK(classify_palm_shape(std::nextafter(0.3, 1.0)) == PalmShape::Curved);
    CHECK_THROWS_AS(classify_palm_shape(1.5), Error);
    CHECK_THROWS_AS(classify_palm_shape(NAN), Error);
}

TEST_CASE("finger spread from adjacent tips") {
    auto r = finger_spread(tips_along_x(20.0));
    CHECK(*r.min_adjacent_distance_mm == doctest::Approx(20.0));
    CHECK(r.spread == FingerSpread::Open);

    r = finger_spread(tips_along_x(5.0));
    CHECK(*r.min_adjacent_distance_mm == doctest::Approx(5.0));
    CHECK(r.spread == FingerSpread::Closed);

    std::array<std::optional<Vec3>, kFingerCount> thumb_only{};
    thumb_only[0] = Vec3(0, 0, 0);
    r = finger_spread(thumb_only);
    CHECK(r.spread == FingerSpread::Unknown);
    CHECK_FALSE(r.min_adjacent_distance_mm);

    // Thumb-index and ring-pinky: two adjacent pairs suffice.
    std::array<std::optional<Vec3>, kFingerCount> gaps{};
    gaps[0] = Vec3(0, 0, 0);
    gaps[1] = Vec3(30, 0, 0);
    gaps[3] = Vec3(60, 0, 0);
    gaps[4] = Vec3(78, 0, 0);
    r = finger_spread(gaps);
    CHECK(r.spread == FingerSpread::Open);
    CHECK(*r.min_adjacent_distance_mm == doctest::Approx(18.0));

    // Non-adjacent tips do not count even when close.
    std::array<std::optional<Vec3>, kFingerCount> skip{};
    skip[0] = Vec3(0, 0, 0);
    skip[2] = Vec3(1, 0, 0);
    skip[4] = Vec3(2, 0, 0);
    CHECK(finger_spread(skip).spread == FingerSpread::Unknown);
}

TEST_CASE("inter-palm distance") {
    CHECK(inter_palm_distance({0, 200, 0}, {100, 200, 0}) == doctest::Approx(100.0));
    CHECK(inter_palm_distance({7, 7, 7}, {7, 7, 7}) == 0.0);
    CHECK(inter_palm_distance({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
}

TEST_CASE("trajectory of exact primitives") {
    PrimitiveParams p;
    p.samples = 50;
    p.amplitude_mm = 50.0;
    const auto circle = generate_primitive(PrimitiveKind::Circle, p);
    CHECK(classify_trajectory(circle.positions, 1.0) == Trajectory::Circular);
    const auto fit = fit_trajectory(circle.positions);
    CHECK(*fit.circle_radius_mm == doctest::Approx(50.0).epsilon(1e-9));

    p.amplitude_mm = 40.0;  // 80 mm end to end
    const auto line = generate_primitive(PrimitiveKind::Line, p);
    CHECK(classify_trajectory(line.positions, 1.0) == Trajectory::Linear);
    CHECK(fit_trajectory(line.positions).line_variance_fraction == doctest::Approx(1.0));

    const auto still = generate_primitive(PrimitiveKind::Static, p);
    CHECK(classify_trajectory(still.positions, 1.0) == Trajectory::Indeterminate);
}

TEST_CASE("noisy circle radius 50 with sigma 2 stays circular") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 2.0);
    PrimitiveParams p;
    p.samples = 100;
    p.amplitude_mm = 50.0;
    auto c = generate_primitive(PrimitiveKind::Circle, p);
    for (auto& v : c.positions) {
        v += Vec3(n(rng), n(rng), n(rng));
    }
    const auto fit = fit_trajectory(c.positions);
    CHECK(*fit.circle_rms_residual_mm / *fit.circle_radius_mm < 0.1);
    CHECK(classify_trajectory(c.positions, 1.0) == Trajectory::Circular);
}

TEST_CASE("circles outside the radius band and short paths are indeterminate") {
    PrimitiveParams p;
    p.samples = 60;
    p.amplitude_mm = 300.0;
    CHECK(classify_trajectory(generate_primitive(PrimitiveKind::Circle, p).positions, 1.0) == Trajectory::Indeterminate);
    // A 1 mm radius circle has a 6.3 mm path: below the stationarity floor.
    p.amplitude_mm = 1.0;
    CHECK(classify_trajectory(generate_primitive(PrimitiveKind::Circle, p).positions, 1.0) == Trajectory::Indeterminate);
    // 4 mm radius: long enough path but below the 5 mm band.
    p.amplitude_mm = 4.0;
    CHECK(classify_trajectory(generate_primitive(PrimitiveKind::Circle, p).positions, 1.0) == Trajectory::Indeterminate);
}

TEST_CASE("trajectory preconditions") {
    PrimitiveParams p;
    p.samples = 9;
    const auto few = generate_primitive(PrimitiveKind::Circle, p);
    try {
        classify_trajectory(few.positions, 1.0);
        FAIL("expected TooFewSamples");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewSamples);
    }
    p.samples = 20;
    const auto ok = generate_primitive(PrimitiveKind::Circle, p);
    CHECK_THROWS_AS(classify_trajectory(ok.positions, 0.1), Error);
    CHECK_THROWS_AS(classify_trajectory(ok.positions, 6.0), Error);
}

TEST_CASE("frequency of generated sinusoids") {
    PrimitiveParams p;
    p.duration_s = 3.0;
    p.amplitude_mm = 30.0;
    p.frequency_hz = 2.0;
    auto s = generate_primitive(PrimitiveKind::Sinusoid1D, p);
    CHECK(*estimate_frequency(s.positions, s.timestamps_ms) == doctest::Approx(2.0).epsilon(0.05));

    p.frequency_hz = 3.6;
    s = generate_primitive(PrimitiveKind::Sinusoid1D, p);
    const double f = *estimate_frequency(s.positions, s.timestamps_ms);
    CHECK(std::abs(f - 3.6) <= 0.15);
    CHECK(stage2_signature().frequency_hz.contains(f));

    p.duration_s = 2.0;
    const auto still = generate_primitive(PrimitiveKind::Static, p);
    CHECK_FALSE(estimate_frequency(still.positions, still.timestamps_ms).has_value());
}

TEST_CASE("frequency is insensitive to axis, offset and moderate noise") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    PrimitiveParams p;
    p.duration_s = 3.0;
    p.amplitude_mm = 25.0;
    p.frequency_hz = 1.7;
    p.axis = Vec3(1, 2, -1).normalized();
    p.center = Vec3(40, 300, -20);
    auto s = generate_primitive(PrimitiveKind::Sinusoid1D, p);
    for (auto& v : s.positions) {
        v += Vec3(n(rng), n(rng), n(rng));
    }
    CHECK(std::abs(*estimate_frequency(s.positions, s.timestamps_ms) - 1.7) <= 0.1);
}

TEST_CASE("frequency of a circle is its revolution rate") {
    PrimitiveParams p;
    p.duration_s = 3.0;
    p.amplitude_mm = 25.0;
    p.frequency_hz = 1.3;
    const auto c = generate_primitive(PrimitiveKind::Circle, p);
    CHECK(std::abs(*estimate_frequency(c.positions, c.timestamps_ms) - 1.3) <= 0.1);
}

TEST_CASE("frequency preconditions") {
    PrimitiveParams p;
    p.duration_s = 0.9;
    auto s = generate_primitive(PrimitiveKind::Sinusoid1D, p);
    try {
        estimate_frequency(s.positions, s.timestamps_ms);
        FAIL("expected TooFewSamples");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewSamples);
    }
    p.duration_s = 2.0;
    p.fps = 40.0;
    s = generate_primitive(PrimitiveKind::Sinusoid1D, p);
    CHECK_THROWS_AS(estimate_frequency(s.positions, s.timestamps_ms), Error);
    // Sub-5 mm motion is treated as no oscillation.
    p.fps = 100.0;
    p.amplitude_mm = 2.0;
    s = generate_primitive(PrimitiveKind::Sinusoid1D, p);
    CHECK_FALSE(estimate_frequency(s.positions, s.timestamps_ms).has_value());
}

TEST_CASE("feature vector of a stage-2 rub window") {
    auto script = canonical_stage2_script(2.0, 3.0, 0.0, 1);
    script.occlusion = OcclusionModel::None;
    const auto s = generate(script);
    const auto window = phase_frames(s, PhaseKind::RubCircular);
    const auto v = extract_feature_vector(window);
    CHECK(v.palm_orientation == PalmOrientation::FacingEachOther);
    CHECK(v.palm_shape_left == PalmShape::Flat);
    CHECK(v.palm_shape_right == PalmShape::Flat);
    CHECK(v.finger_spread_left == FingerSpread::Closed);
    CHECK(v.finger_spread_right == FingerSpread::Closed);
    CHECK(v.trajectory == Trajectory::Circular);
    REQUIRE(v.movement_frequency_hz);
    CHECK(*v.movement_frequency_hz == doctest::Approx(2.0).epsilon(0.05));
    CHECK(v.window_span_s == doctest::Approx(2.99));
}

TEST_CASE("feature vector of a stage-3 window") {
    const auto s = generate(stage3_script(2.0, 3.0));
    const auto v = extract_feature_vector(phase_frames(s, PhaseKind::Stage3Linear));
    CHECK(v.palm_orientation == PalmOrientation::OnePalmOverOther);
    CHECK(v.palm_shape_left == PalmShape::Flat);
    CHECK(v.palm_shape_right == PalmShape::Flat);
    CHECK(v.finger_spread_left == FingerSpread::Open);
    CHECK(v.finger_spread_right == FingerSpread::Open);
    CHECK(v.trajectory == Trajectory::Linear);
}

TEST_CASE("occluded rub window has no two-hand frames") {
    const auto s = generate(canonical_stage2_script());
    const auto v = extract_feature_vector(phase_frames(s, PhaseKind::RubCircular));
    CHECK(v.palm_orientation == PalmOrientation::Other);
    CHECK_FALSE(v.inter_palm_distance_mm);
    CHECK_FALSE(v.palm_shape_left);
    CHECK(v.finger_spread_left == FingerSpread::Unknown);
    CHECK(v.trajectory == Trajectory::Circular);
}

TEST_CASE("extract_feature_vector preconditions") {
    CHECK_THROWS_AS(extract_feature_vector({}), Error);
    const auto s = generate(canonical_stage2_script());
    const std::span<const Frame> all(s.stream.frames);
    try {
        extract_feature_vector(all.subspan(0, 50));
        FAIL("expected InsufficientWindow");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientWindow);
    }
    std::vector<Frame> sparse(all.begin(), all.begin() + 200);
    for (std::size_t i = 0; i < sparse.size(); i += 5) {
        sparse[i].hands.clear();
    }
    CHECK_NOTHROW(extract_feature_vector(sparse));  // 160 of 200 frames still have hands
    for (std::size_t i = 1; i < sparse.size(); i += 5) {
        sparse[i].hands.clear();
    }
    CHECK_THROWS_AS(extract_feature_vector(sparse), Error);
}

TEST_CASE("signature matching") {
    FeatureVector s2;
    s2.palm_orientation = PalmOrientation::FacingEachOther;
    s2.palm_shape_left = s2.palm_shape_right = PalmShape::Flat;
    s2.finger_spread_left = s2.finger_spread_right = FingerSpread::Closed;
    s2.trajectory = Trajectory::Circular;
    s2.movement_frequency_hz = 2.0;
    s2.window_span_s = 3.0;

    auto m = match_signature(s2, stage2_signature());
    CHECK(m.match);
    CHECK(m.score == 1.0);

    m = match_signature(s2, stage3_signature());
    CHECK_FALSE(m.match);
    CHECK(m.score == 0.0);

    auto unknown = s2;
    unknown.finger_spread_left = unknown.finger_spread_right = FingerSpread::Unknown;
    m = match_signature(unknown, stage2_signature());
    CHECK_FALSE(m.match);
    CHECK(m.score == 0.5);

    // A non-discriminative contradiction blocks the match but not the score.
    auto fast = s2;
    fast.movement_frequency_hz = 5.0;
    m = match_signature(fast, stage2_signature());
    CHECK_FALSE(m.match);
    CHECK(m.score == 1.0);

    auto too_long = s2;
    too_long.window_span_s = 8.0;
    CHECK_FALSE(match_signature(too_long, stage2_signature()).match);

    // Short windows are slices of a stage, not evidence against it.
    auto short_window = s2;
    short_window.window_span_s = 1.0;
    CHECK(match_signature(short_window, stage2_signature()).match);
}

TEST_CASE("published signature constants") {
    const auto& s2 = stage2_signature();
    CHECK(s2.frequency_hz.min == 0.8);
    CHECK(s2.frequency_hz.max == 3.6);
    CHECK(s2.duration_s.min == 2.0);
    CHECK(s2.duration_s.max == 7.0);
    CHECK(s2.orientation == PalmOrientation::FacingEachOther);
    CHECK(s2.spread == FingerSpread::Closed);
    const auto& s3 = stage3_signature();
    CHECK(s3.frequency_hz.min == 1.0);
    CHECK(s3.frequency_hz.max == 3.0);
    CHECK(s3.duration_s.min == 1.0);
    CHECK(s3.duration_s.max == 10.0);
    CHECK(s3.orientation == PalmOrientation::OnePalmOverOther);
    CHECK(s3.spread == FingerSpread::Open);
    for (const auto* s : {&s2, &s3}) {
        CHECK(s->discriminative.orientation);
        CHECK(s->discriminative.spread);
        CHECK_FALSE(s->discriminative.trajectory);
        CHECK_FALSE(s->discriminative.frequency);
    }
}

#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "hge/error.hpp"
#include "hge/mlprep.hpp"
#include "hge/synth.hpp"

using namespace hge;

namespace {

HandObservation posed(Handedness h, double x, double grab, double spacing) {
    HandObservation o;
    o.handedness = h;
    o.palm_position = Vec3(x, 200.0, 0.0);
    o.palm_normal = Vec3(h == Handedness::Left ? 1.0 : -1.0, 0.0, 0.0);
    o.grab_strength = grab;
    for (std::size_t k = 0; k < kFingerCount; ++k) {
        o.fingertips[k] = o.palm_position + Vec3(0.0, 80.0, spacing * (static_cast<double>(k) - 2.0));
    }
    return o;
}

std::vector<Frame> window(double grab, double spacing, double separation = 20.0, int frames = 151) {
    std::vector<Frame> out;
    for (int i = 0; i < frames; ++i) {
        out.push_back(testutil::frame(i * 10, {posed(Handedness::Left, -separation / 2, grab, spacing),
                                               posed(Handedness::Right, separation / 2, grab, spacing)}));
    }
    return out;
}

}  // namespace

TEST_CASE("a palm-to-palm window becomes one row") {
    const auto frames = window(0.6, 25.66);
    const std::vector<LabeledWindow> windows{{frames, "Hands Palm to palm"}};
    const auto rows = build_dataset(windows);
    REQUIRE(rows.size() == 1);
    const auto& r = rows[0];
    CHECK(r.sample_no == 1);
    CHECK(*r.curvature_left == doctest::Approx(0.6));
    CHECK(*r.curvature_right == doctest::Approx(0.6));
    CHECK(*r.fingertip_distance_left_mm == doctest::Approx(25.66));
    CHECK(*r.fingertip_distance_right_mm == doctest::Approx(25.66));
    CHECK(*r.inter_palm_distance_mm == doctest::Approx(20.0));
    CHECK(r.orientation == PalmOrientation::FacingEachOther);
    CHECK(r.label == "Hands Palm to palm");

    const auto csv = dataset_to_csv(rows);
    CHECK(csv.rfind(std::string(kDatasetHeader) + "\n", 0) == 0);
    CHECK(csv.find("\n1,0.6,0.6,25.66,25.66,0,") != std::string::npos);
    CHECK(csv.substr(csv.size() - 20) == ",Hands Palm to palm\n");
}

TEST_CASE("empty input gives an empty dataset") {
    CHECK(build_dataset({}).empty());
    CHECK(dataset_to_csv({}) == std::string(kDatasetHeader) + "\n");
}

TEST_CASE("rows are numbered in input order") {
    const auto a = window(0.1, 10.0);
    const auto b = window(0.8, 12.0);
    const std::vector<LabeledWindow> windows{{a, "Hands Palm to palm"}, {b, "Palm to Palm with fingers interlocked"}};
    const auto rows = build_dataset(windows);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].sample_no == 1);
    CHECK(rows[1].sample_no == 2);
    CHECK(rows[1].label == "Palm to Palm with fingers interlocked");
    CHECK(*rows[1].curvature_left == doctest::Approx(0.8));
    CHECK(dataset_to_csv(rows) == dataset_to_csv(build_dataset(windows)));
}

TEST_CASE("mean and median aggregation differ on skewed windows") {
    auto frames = window(0.2, 10.0);
    for (std::size_t i = 0; i < 30; ++i) {
        for (auto& h : frames[i].hands) {
            h.grab_strength = 0.9;
        }
    }
    const std::vector<LabeledWindow> windows{{frames, "x"}};
    Config mean_cfg;
    Config median_cfg;
    median_cfg.aggregation = Aggregation::Median;
    const double n = static_cast<double>(frames.size());
    CHECK(*build_dataset(windows, mean_cfg)[0].curvature_left == doctest::Approx((30 * 0.9 + (n - 30) * 0.2) / n));
    CHECK(*build_dataset(windows, median_cfg)[0].curvature_left == doctest::Approx(0.2));
}

TEST_CASE("an absent hand leaves empty cells") {
    auto frames = window(0.2, 10.0);
    for (auto& f : frames) {
        f.hands.erase(f.hands.begin());
    }
    const std::vector<LabeledWindow> windows{{frames, "one hand"}};
    const auto rows = build_dataset(windows);
    CHECK_FALSE(rows[0].curvature_left);
    CHECK_FALSE(rows[0].inter_palm_distance_mm);
    const auto csv = dataset_to_csv(rows);
    CHECK(csv.find("\n1,,0.2,,10,") != std::string::npos);
}

TEST_CASE("labels with commas or quotes are quoted") {
    const auto frames = window(0.1, 10.0);
    const std::vector<LabeledWindow> windows{{frames, "rub, \"fast\""}};
    const auto csv = dataset_to_csv(build_dataset(windows));
    CHECK(csv.find(",\"rub, \"\"fast\"\"\"\n") != std::string::npos);
}

TEST_CASE("insufficient window names its index; empty labels are rejected") {
    const auto good = window(0.1, 10.0);
    const auto short_window = window(0.1, 10.0, 20.0, 50);
    const std::vector<LabeledWindow> windows{{good, "a"}, {short_window, "b"}};
    try {
        build_dataset(windows);
        FAIL("expected InsufficientWindow");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientWindow);
        CHECK(e.message().find("window 1") != std::string::npos);
    }
    const std::vector<LabeledWindow> unlabeled{{good, ""}};
    CHECK_THROWS_AS(build_dataset(unlabeled), Error);
}

TEST_CASE("synthetic windows give finite cells") {
    auto script = canonical_stage2_script(2.0, 3.0, 1.0, 4);
    script.occlusion = OcclusionModel::None;
    const auto s = generate(script);
    const std::span<const Frame> all(s.stream.frames);
    const std::vector<LabeledWindow> windows{{all.subspan(0, 150), "hold"}, {all.subspan(200, 300), "rub"}};
    for (const auto& r : build_dataset(windows)) {
        for (const auto& v : {r.curvature_left, r.curvature_right, r.fingertip_distance_left_mm,
                              r.fingertip_distance_right_mm, r.frequency_hz, r.inter_palm_distance_mm}) {
            if (v) {
                CHECK(std::isfinite(*v));
            }
        }
        CHECK(*r.curvature_left >= 0.0);
        CHECK(*r.curvature_left <= 1.0);
    }
}

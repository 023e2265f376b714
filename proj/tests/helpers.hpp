#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hge/frame_model.hpp"

namespace testutil {

using hge::Frame;
using hge::Handedness;
using hge::HandObservation;
using hge::Vec3;

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v;
    do {
        v = {n(rng), n(rng), n(rng)};
    } while (v.norm() < 1e-6);
    return v.normalized();
}

inline Vec3 random_point(std::mt19937_64& rng, double half_extent = 200.0) {
    std::uniform_real_distribution<double> u(-half_extent, half_extent);
    return {u(rng), u(rng), u(rng)};
}

inline HandObservation hand(Handedness h, Vec3 pos = {0.0, 200.0, 0.0}, Vec3 normal = {0.0, -1.0, 0.0},
                            double grab = 0.1) {
    HandObservation o;
    o.handedness = h;
    o.palm_position = pos;
    o.palm_normal = normal;
    o.grab_strength = grab;
    for (std::size_t k = 0; k < hge::kFingerCount; ++k) {
        o.fingertips[k] = pos + Vec3(10.0 * (static_cast<double>(k) - 2.0), 0.0, -80.0);
    }
    return o;
}

inline Frame frame(std::int64_t t, std::vector<HandObservation> hands) {
    Frame f;
    f.timestamp_ms = t;
    f.hands = std::move(hands);
    return f;
}

inline std::vector<hge::TimedHand> records(Handedness h, const std::vector<std::int64_t>& times) {
    std::vector<hge::TimedHand> out;
    for (auto t : times) {
        out.push_back({t, hand(h)});
    }
    return out;
}

// Strictly increasing timestamps with random gaps in [1, max_gap].
inline std::vector<std::int64_t> random_times(std::mt19937_64& rng, std::size_t n, std::int64_t max_gap) {
    std::uniform_int_distribution<std::int64_t> gap(1, max_gap);
    std::vector<std::int64_t> out;
    std::int64_t t = gap(rng) - 1;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(t);
        t += gap(rng);
    }
    return out;
}

}  // namespace testutil

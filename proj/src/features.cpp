#include "hge/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "hge/error.hpp"

namespace hge {

OppositionResult palm_opposition(const Vec3& normal_left, const Vec3& normal_right, double threshold) {
    for (const Vec3* n : {&normal_left, &normal_right}) {
        if (!n->allFinite() || std::abs(n->norm() - 1.0) > kNormalTolerance) {
            throw Error(ErrorKind::NonUnitNormal, "palm normal is not unit length");
        }
    }
    OppositionResult r;
    r.resultant_magnitude = (normal_left + normal_right).norm();
    r.facing = r.resultant_magnitude < threshold;
    return r;
}

PalmShape classify_palm_shape(double grab_strength, double flat_max) {
    if (!(grab_strength >= 0.0 && grab_strength <= 1.0)) {
        throw Error(ErrorKind::GrabOutOfRange, "grab_strength " + format_double(grab_strength) + " outside [0,1]");
    }
    return grab_strength <= flat_max ? PalmShape::Flat : PalmShape::Curved;
}

SpreadResult finger_spread(const std::array<std::optional<Vec3>, kFingerCount>& fingertips, double open_min_mm) {
    SpreadResult r;
    int pairs = 0;
    for (std::size_t i = 0; i + 1 < kFingerCount; ++i) {
        if (fingertips[i] && fingertips[i + 1]) {
            const double d = (*fingertips[i] - *fingertips[i + 1]).norm();
            r.min_adjacent_distance_mm = r.min_adjacent_distance_mm ? std::min(*r.min_adjacent_distance_mm, d) : d;
            ++pairs;
        }
    }
    if (pairs >= 2) {
        r.spread = *r.min_adjacent_distance_mm >= open_min_mm ? FingerSpread::Open : FingerSpread::Closed;
    }
    return r;
}

double inter_palm_distance(const Vec3& palm_left, const Vec3& palm_right) { return (palm_left - palm_right).norm(); }

PrincipalAxes principal_axes(std::span<const Vec3> points) {
    PrincipalAxes pa;
    if (points.empty()) {
        return pa;
    }
    for (const auto& p : points) {
        pa.centroid += p;
    }
    pa.centroid /= static_cast<double>(points.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : points) {
        const Vec3 d = p - pa.centroid;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(points.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    // Eigen sorts ascending.
    for (int k = 0; k < 3; ++k) {
        pa.variances[k] = std::max(0.0, solver.eigenvalues()[2 - k]);
        pa.axes[static_cast<std::size_t>(k)] = solver.eigenvectors().col(2 - k);
    }
    return pa;
}

TrajectoryFit fit_trajectory(std::span<const Vec3> positions) {
    TrajectoryFit fit;
    for (std::size_t i = 1; i < positions.size(); ++i) {
        fit.path_length_mm += (positions[i] - positions[i - 1]).norm();
    }
    const auto pa = principal_axes(positions);
    const double total = pa.variances.sum();
    if (total <= 0.0) {
        return fit;
    }
    fit.line_variance_fraction = pa.variances[0] / total;

    // Algebraic circle fit in the dominant plane: x^2 + y^2 + D x + E y + F = 0.
    const auto n = static_cast<Eigen::Index>(positions.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3 d = positions[static_cast<std::size_t>(i)] - pa.centroid;
        const double x = d.dot(pa.axes[0]);
        const double y = d.dot(pa.axes[1]);
        a(i, 0) = x;
        a(i, 1) = y;
        a(i, 2) = 1.0;
        b(i) = -(x * x + y * y);
    }
    const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(b);
    const double cx = -sol[0] / 2.0;
    const double cy = -sol[1] / 2.0;
    const double r2 = cx * cx + cy * cy - sol[2];
    if (!(r2 > 0.0) || !std::isfinite(r2)) {
        return fit;
    }
    const double radius = std::sqrt(r2);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dr = std::hypot(a(i, 0) - cx, a(i, 1) - cy) - radius;
        sq += dr * dr;
    }
    fit.circle_radius_mm = radius;
    fit.circle_rms_residual_mm = std::sqrt(sq / static_cast<double>(n));
    return fit;
}

Trajectory classify_trajectory(std::span<const Vec3> positions, double window_span_s, const FeatureConfig& config) {
    if (positions.size() < 10) {
        throw Error(ErrorKind::TooFewSamples, std::to_string(positions.size()) + " samples, need at least 10");
    }
    if (!(window_span_s >= 0.25 && window_span_s <= config.max_trajectory_window_s)) {
        throw Error(ErrorKind::InvalidArgument, "trajectory window of " + format_double(window_span_s) + " s");
    }
    const auto fit = fit_trajectory(positions);
    if (fit.path_length_mm < config.stationary_path_min_mm) {
        return Trajectory::Indeterminate;
    }
    if (fit.line_variance_fraction >= config.line_variance_min) {
        return Trajectory::Linear;
    }
    if (fit.circle_radius_mm && *fit.circle_rms_residual_mm <= config.circle_residual_max * *fit.circle_radius_mm &&
        *fit.circle_radius_mm >= config.circle_radius_min_mm && *fit.circle_radius_mm <= config.circle_radius_max_mm) {
        return Trajectory::Circular;
    }
    return Trajectory::Indeterminate;
}

namespace {

constexpr double kMinFrequencySpanS = 1.0;
constexpr double kMinFrequencyRate = 50.0;

struct Crossing {
    double time_s;
    bool rising;
};

// Schmitt-trigger zero crossings. A crossing is confirmed once the signal
// reaches the opposite hysteresis band; its time is the interpolated last
// sign change before confirmation.
std::vector<Crossing> find_crossings(const std::vector<double>& s, const std::vector<double>& t, double band) {
    std::vector<Crossing> out;
    int side = 0;
    std::size_t last_confirm = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        int now = 0;
        if (s[k] >= band) {
            now = 1;
        } else if (s[k] <= -band) {
            now = -1;
        }
        if (now == 0 || now == side) {
            continue;
        }
        if (side != 0) {
            for (std::size_t m = k; m > last_confirm; --m) {
                const double a = s[m - 1];
                const double b = s[m];
                const bool changed = now > 0 ? (a < 0.0 && b >= 0.0) : (a >= 0.0 && b < 0.0);
                if (changed) {
                    const double frac = a / (a - b);
                    out.push_back({t[m - 1] + frac * (t[m] - t[m - 1]), now > 0});
                    break;
                }
            }
        }
        side = now;
        last_confirm = k;
    }
    return out;
}

}  // namespace

std::optional<double> estimate_frequency(std::span<const Vec3> positions, std::span<const std::int64_t> timestamps_ms,
                                         const FeatureConfig& config) {
    if (positions.size() != timestamps_ms.size()) {
        throw Error(ErrorKind::InvalidArgument, "positions and timestamps differ in length");
    }
    if (positions.size() < 2) {
        throw Error(ErrorKind::TooFewSamples, "need at least two samples");
    }
    const double span_s = static_cast<double>(timestamps_ms.back() - timestamps_ms.front()) / 1000.0;
    if (span_s < kMinFrequencySpanS - 1e-9) {
        throw Error(ErrorKind::TooFewSamples, "window of " + format_double(span_s) + " s, need 1 s");
    }
    if (static_cast<double>(positions.size() - 1) / span_s < kMinFrequencyRate * (1.0 - 1e-9)) {
        throw Error(ErrorKind::TooFewSamples, "sampling rate below 50 FPS");
    }

    const auto pa = principal_axes(positions);
    std::vector<double> s(positions.size());
    std::vector<double> t(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        s[i] = (positions[i] - pa.centroid).dot(pa.axes[0]);
        t[i] = static_cast<double>(timestamps_ms[i] - timestamps_ms.front()) / 1000.0;
    }
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    const double peak_to_peak = *hi - *lo;
    if (peak_to_peak < config.frequency_min_peak_to_peak_mm) {
        return std::nullopt;
    }
    // Over a fractional number of cycles the mean drifts off the oscillation
    // centre; the midrange does not.
    const double mid = 0.5 * (*hi + *lo);
    for (auto& v : s) {
        v -= mid;
    }

    const auto crossings = find_crossings(s, t, config.frequency_hysteresis_fraction * peak_to_peak);

    // Same-direction crossings are exactly one period apart regardless of
    // any residual offset, so prefer whole periods when available.
    double periods = 0.0;
    double elapsed = 0.0;
    for (bool rising : {true, false}) {
        std::vector<double> times;
        for (const auto& c : crossings) {
            if (c.rising == rising) {
                times.push_back(c.time_s);
            }
        }
        if (times.size() >= 2) {
            periods += static_cast<double>(times.size() - 1);
            elapsed += times.back() - times.front();
        }
    }
    if (periods > 0.0 && elapsed > 0.0) {
        return periods / elapsed;
    }
    if (crossings.size() >= 2) {
        const double dt = crossings.back().time_s - crossings.front().time_s;
        if (dt > 0.0) {
            return static_cast<double>(crossings.size() - 1) / (2.0 * dt);
        }
    }
    return static_cast<double>(crossings.size()) / (2.0 * span_s);
}

namespace {

struct HandSeries {
    std::vector<Vec3> positions;
    std::vector<std::int64_t> timestamps;
    std::vector<double> grabs;
    std::vector<double> spreads;  // per-frame min adjacent distance where the spread is known
    double path_length{0.0};
};

HandSeries collect(std::span<const Frame> window, Handedness h, const FeatureConfig& config) {
    HandSeries hs;
    for (const auto& f : window) {
        const auto* hand = f.find(h);
        if (!hand) {
            continue;
        }
        if (!hs.positions.empty()) {
            hs.path_length += (hand->palm_position - hs.positions.back()).norm();
        }
        hs.positions.push_back(hand->palm_position);
        hs.timestamps.push_back(f.timestamp_ms);
        hs.grabs.push_back(hand->grab_strength);
        const auto sr = finger_spread(hand->fingertips, config.open_spread_min_mm);
        if (sr.spread != FingerSpread::Unknown) {
            hs.spreads.push_back(*sr.min_adjacent_distance_mm);
        }
    }
    return hs;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

FeatureVector extract_feature_vector(std::span<const Frame> window, const FeatureConfig& config) {
    if (window.empty()) {
        throw Error(ErrorKind::InsufficientWindow, "empty window");
    }
    FeatureVector fv;
    fv.window_span_s = static_cast<double>(window.back().timestamp_ms - window.front().timestamp_ms) / 1000.0;
    if (fv.window_span_s < config.min_window_s - 1e-9) {
        throw Error(ErrorKind::InsufficientWindow,
                    "window spans " + format_double(fv.window_span_s) + " s, need " + format_double(config.min_window_s));
    }
    const auto with_hands =
        std::count_if(window.begin(), window.end(), [](const Frame& f) { return f.hand_count() > 0; });
    if (static_cast<double>(with_hands) < config.min_hand_presence * static_cast<double>(window.size()) - 1e-9) {
        throw Error(ErrorKind::InsufficientWindow, "hands present in too few frames");
    }

    // Orientation votes over two-hand frames.
    std::size_t two_hand = 0;
    std::size_t facing = 0;
    std::size_t stacked = 0;
    double ipd_sum = 0.0;
    const double cos_stack = std::cos(config.stacked_angle_max_deg * std::numbers::pi / 180.0);
    for (const auto& f : window) {
        const auto* l = f.left();
        const auto* r = f.right();
        if (!l || !r) {
            continue;
        }
        ++two_hand;
        const auto opp = palm_opposition(l->palm_normal, r->palm_normal, config.facing_threshold);
        if (opp.facing) {
            ++facing;
        }
        const Vec3 disp = r->palm_position - l->palm_position;
        const double dist = disp.norm();
        ipd_sum += dist;
        if (opp.resultant_magnitude > config.parallel_resultant_min && dist > 0.0) {
            const Vec3 shared = (l->palm_normal + r->palm_normal).normalized();
            if (std::abs(disp.dot(shared)) / dist >= cos_stack) {
                ++stacked;
            }
        }
    }
    if (two_hand > 0) {
        const double n = static_cast<double>(two_hand);
        if (static_cast<double>(facing) >= config.orientation_vote_fraction * n) {
            fv.palm_orientation = PalmOrientation::FacingEachOther;
        } else if (static_cast<double>(stacked) >= config.orientation_vote_fraction * n) {
            fv.palm_orientation = PalmOrientation::OnePalmOverOther;
        }
        fv.inter_palm_distance_mm = ipd_sum / n;
    }

    const auto left = collect(window, Handedness::Left, config);
    const auto right = collect(window, Handedness::Right, config);
    if (!left.grabs.empty()) {
        fv.palm_shape_left = classify_palm_shape(mean(left.grabs), config.flat_grab_max);
    }
    if (!right.grabs.empty()) {
        fv.palm_shape_right = classify_palm_shape(mean(right.grabs), config.flat_grab_max);
    }
    if (!left.spreads.empty()) {
        fv.finger_spread_left = mean(left.spreads) >= config.open_spread_min_mm ? FingerSpread::Open : FingerSpread::Closed;
    }
    if (!right.spreads.empty()) {
        fv.finger_spread_right =
            mean(right.spreads) >= config.open_spread_min_mm ? FingerSpread::Open : FingerSpread::Closed;
    }

    // Motion features follow the more mobile of the well-tracked hands.
    const HandSeries* mover = nullptr;
    for (const HandSeries* hs : {&right, &left}) {
        if (static_cast<double>(hs->positions.size()) < 0.5 * static_cast<double>(window.size())) {
            continue;
        }
        if (!mover || hs->path_length > mover->path_length) {
            mover = hs;
        }
    }
    if (mover) {
        const auto horizon_ms = static_cast<std::int64_t>(std::llround(config.max_trajectory_window_s * 1000.0));
        const auto cutoff = mover->timestamps.back() - horizon_ms;
        const auto first = static_cast<std::size_t>(
            std::lower_bound(mover->timestamps.begin(), mover->timestamps.end(), cutoff) - mover->timestamps.begin());
        const std::span<const Vec3> recent(mover->positions.data() + first, mover->positions.size() - first);
        const double recent_span =
            static_cast<double>(mover->timestamps.back() - mover->timestamps[first]) / 1000.0;
        if (recent.size() >= 10 && recent_span >= 0.25) {
            fv.trajectory = classify_trajectory(recent, recent_span, config);
        }
        try {
            fv.movement_frequency_hz = estimate_frequency(mover->positions, mover->timestamps, config);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TooFewSamples) {
                throw;
            }
        }
    }
    return fv;
}

const StageSignature& stage2_signature() {
    static const StageSignature s = [] {
        StageSignature sig;
        sig.stage = StageId::Stage2;
        sig.orientation = PalmOrientation::FacingEachOther;
        sig.shape = PalmShape::Flat;
        sig.spread = FingerSpread::Closed;
        sig.trajectories = {Trajectory::Linear, Trajectory::Circular};
        sig.frequency_hz = {0.8, 3.6};
        sig.duration_s = {2.0, 7.0};
        sig.discriminative.orientation = true;
        sig.discriminative.spread = true;
        return sig;
    }();
    return s;
}

const StageSignature& stage3_signature() {
    static const StageSignature s = [] {
        StageSignature sig;
        sig.stage = StageId::Stage3;
        sig.orientation = PalmOrientation::OnePalmOverOther;
        sig.shape = PalmShape::Flat;
        sig.spread = FingerSpread::Open;
        sig.trajectories = {Trajectory::Linear};
        sig.frequency_hz = {1.0, 3.0};
        sig.duration_s = {1.0, 10.0};
        sig.discriminative.orientation = true;
        sig.discriminative.spread = true;
        return sig;
    }();
    return s;
}

namespace {

enum class Status { Satisfied, Contradicted, Unknown };

template <typename T>
Status per_hand(const std::optional<T>& l, const std::optional<T>& r, T expected) {
    bool any = false;
    for (const auto* v : {&l, &r}) {
        if (!*v) {
            continue;
        }
        if (**v != expected) {
            return Status::Contradicted;
        }
        any = true;
    }
    return any ? Status::Satisfied : Status::Unknown;
}

std::optional<FingerSpread> known(FingerSpread s) {
    return s == FingerSpread::Unknown ? std::nullopt : std::optional<FingerSpread>(s);
}

}  // namespace

SignatureMatch match_signature(const FeatureVector& v, const StageSignature& s) {
    struct Check {
        bool discriminative;
        Status status;
    };
    const Status orientation = v.palm_orientation == s.orientation ? Status::Satisfied : Status::Contradicted;
    const Status shape = per_hand(v.palm_shape_left, v.palm_shape_right, s.shape);
    const Status spread = per_hand(known(v.finger_spread_left), known(v.finger_spread_right), s.spread);
    Status trajectory = Status::Unknown;
    if (v.trajectory != Trajectory::Indeterminate) {
        trajectory = std::find(s.trajectories.begin(), s.trajectories.end(), v.trajectory) != s.trajectories.end()
                         ? Status::Satisfied
                         : Status::Contradicted;
    }
    Status frequency = Status::Unknown;
    if (v.movement_frequency_hz) {
        frequency = s.frequency_hz.contains(*v.movement_frequency_hz) ? Status::Satisfied : Status::Contradicted;
    }
    // A window shorter than the stage is a slice of it, not evidence against it.
    Status duration = Status::Unknown;
    if (v.window_span_s > s.duration_s.max) {
        duration = Status::Contradicted;
    } else if (v.window_span_s >= s.duration_s.min) {
        duration = Status::Satisfied;
    }

    const std::array<Check, 6> checks{{
        {s.discriminative.orientation, orientation},
        {s.discriminative.shape, shape},
        {s.discriminative.spread, spread},
        {s.discriminative.trajectory, trajectory},
        {s.discriminative.frequency, frequency},
        {s.discriminative.duration, duration},
    }};
    int disc = 0;
    int satisfied = 0;
    bool ok = true;
    for (const auto& c : checks) {
        if (c.discriminative) {
            ++disc;
            if (c.status == Status::Satisfied) {
                ++satisfied;
            } else {
                ok = false;
            }
        } else if (c.status == Status::Contradicted) {
            ok = false;
        }
    }
    SignatureMatch m;
    m.score = disc > 0 ? static_cast<double>(satisfied) / disc : 1.0;
    m.match = ok;
    return m;
}

std::string_view to_string(PalmShape v) { return v == PalmShape::Flat ? "Flat" : "Curved"; }

std::string_view to_string(FingerSpread v) {
    switch (v) {
        case FingerSpread::Open: return "Open";
        case FingerSpread::Closed: return "Closed";
        case FingerSpread::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string_view to_string(Trajectory v) {
    switch (v) {
        case Trajectory::Linear: return "Linear";
        case Trajectory::Circular: return "Circular";
        case Trajectory::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

std::string_view to_string(PalmOrientation v) {
    switch (v) {
        case PalmOrientation::FacingEachOther: return "FacingEachOther";
        case PalmOrientation::OnePalmOverOther: return "OnePalmOverOther";
        case PalmOrientation::Other: return "Other";
    }
    return "Other";
}

std::string_view to_string(StageId v) { return v == StageId::Stage2 ? "Stage2" : "Stage3"; }

}  // namespace hge

#include "hge/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "hge/error.hpp"
#include "hge/kv_text.hpp"

namespace hge {

std::string_view to_string(PhaseKind k) {
    switch (k) {
        case PhaseKind::Idle: return "idle";
        case PhaseKind::FacingHold: return "facing_hold";
        case PhaseKind::Approach: return "approach";
        case PhaseKind::RubCircular: return "rub_circular";
        case PhaseKind::Stage3Linear: return "stage3_linear";
        case PhaseKind::Primitive: return "primitive";
    }
    return "idle";
}

std::string_view to_string(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::Sinusoid1D: return "sinusoid";
        case PrimitiveKind::Circle: return "circle";
        case PrimitiveKind::Line: return "line";
        case PrimitiveKind::Static: return "static";
    }
    return "static";
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFingerLengthMm = 80.0;
constexpr double kStackOffsetMm = 30.0;
constexpr double kStage3StrokeMm = 15.0;

[[noreturn]] void bad_script(const std::string& message) { throw Error(ErrorKind::InvalidScript, message); }

// Fingertips laid out in the palm plane: extending along `reach`, spread
// along `across` at a fixed adjacent spacing.
HandObservation make_hand(Handedness h, const Vec3& pos, const Vec3& normal, const Vec3& vel, double spacing,
                          const Vec3& reach, const Vec3& across) {
    HandObservation hand;
    hand.handedness = h;
    hand.palm_position = pos;
    hand.palm_normal = normal;
    hand.palm_velocity = vel;
    hand.grab_strength = kFlatGrab;
    for (std::size_t f = 0; f < kFingerCount; ++f) {
        hand.fingertips[f] = pos + kFingerLengthMm * reach + (static_cast<double>(f) - 2.0) * spacing * across;
    }
    return hand;
}

Handedness other(Handedness h) { return h == Handedness::Left ? Handedness::Right : Handedness::Left; }

double side(Handedness h) { return h == Handedness::Left ? -1.0 : 1.0; }

// Palm normal pointing at the other hand (left hand sits at -x).
Vec3 facing_normal(Handedness h) { return {-side(h), 0.0, 0.0}; }

const Vec3 kDown{0.0, -1.0, 0.0};
const Vec3 kUp{0.0, 1.0, 0.0};
const Vec3 kAway{0.0, 0.0, -1.0};

struct Motion {
    Vec3 offset{Vec3::Zero()};
    Vec3 velocity{Vec3::Zero()};
};

// Survivor-hand motion during contact phases, starting at zero offset.
// e1/e2 span the palm plane of facing palms.
Motion contact_motion(const PhaseSpec& p, double tau) {
    const Vec3 e1 = Vec3::UnitY();
    const Vec3 e2 = Vec3::UnitZ();
    const double w = kTwoPi * p.rub_frequency_hz;
    const double a = p.rub_radius_mm;
    const PrimitiveKind kind = p.kind == PhaseKind::RubCircular ? PrimitiveKind::Circle : p.primitive;
    Motion m;
    switch (kind) {
        case PrimitiveKind::Circle:
            m.offset = a * ((std::cos(w * tau) - 1.0) * e1 + std::sin(w * tau) * e2);
            m.velocity = a * w * (-std::sin(w * tau) * e1 + std::cos(w * tau) * e2);
            break;
        case PrimitiveKind::Sinusoid1D:
            m.offset = a * std::sin(w * tau) * e1;
            m.velocity = a * w * std::cos(w * tau) * e1;
            break;
        case PrimitiveKind::Line:
            m.offset = (2.0 * a / p.duration_s) * tau * e1;
            m.velocity = (2.0 * a / p.duration_s) * e1;
            break;
        case PrimitiveKind::Static:
            break;
    }
    return m;
}

void add_noise(FrameStream& stream, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) {
        return;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    const auto jitter = [&](Vec3& v) {
        for (int k = 0; k < 3; ++k) {
            v[k] += noise(rng);
        }
    };
    for (auto& frame : stream.frames) {
        for (auto& hand : frame.hands) {
            jitter(hand.palm_position);
            for (auto& tip : hand.fingertips) {
                if (tip) {
                    jitter(*tip);
                }
            }
        }
    }
}

}  // namespace

void validate_script(const GestureScript& s) {
    if (s.phases.empty()) {
        bad_script("script has no phases");
    }
    if (!(s.fps >= 50.0 && s.fps <= 200.0)) {
        bad_script("fps must lie in [50, 200]");
    }
    if (!(s.noise_sigma_mm >= 0.0) || !std::isfinite(s.noise_sigma_mm)) {
        bad_script("noise_sigma must be >= 0");
    }
    if (!(s.start_separation_mm >= 0.0) || !(s.contact_separation_mm >= 0.0)) {
        bad_script("separations must be >= 0");
    }
    for (std::size_t i = 0; i < s.phases.size(); ++i) {
        const auto& p = s.phases[i];
        const auto where = "phase " + std::to_string(i + 1) + ": ";
        if (!(p.duration_s > 0.0) || !std::isfinite(p.duration_s)) {
            bad_script(where + "duration must be > 0");
        }
        if (!(p.rub_frequency_hz >= 0.0) || !(p.rub_radius_mm >= 0.0)) {
            bad_script(where + "frequency and radius must be >= 0");
        }
        if (p.approach_speed_mm_s && !(*p.approach_speed_mm_s > 0.0)) {
            bad_script(where + "approach speed must be > 0");
        }
        if (p.start_separation_mm && !(*p.start_separation_mm >= 0.0)) {
            bad_script(where + "start separation must be >= 0");
        }
    }
}

LabeledStream generate(const GestureScript& script) {
    validate_script(script);
    LabeledStream out;
    out.stream.nominal_fps = script.fps;

    const Handedness lead = script.survivor;
    const Handedness follow = other(lead);
    double separation = script.start_separation_mm;
    std::int64_t global = 0;

    for (std::size_t pi = 0; pi < script.phases.size(); ++pi) {
        const auto& p = script.phases[pi];
        if (p.start_separation_mm) {
            separation = *p.start_separation_mm;
        }
        const double phase_start_s = static_cast<double>(global) / script.fps;
        const auto count = static_cast<std::int64_t>(std::llround(p.duration_s * script.fps));
        const double start_sep = separation;
        const double speed = p.approach_speed_mm_s.value_or((start_sep - script.contact_separation_mm) / p.duration_s);

        for (std::int64_t k = 0; k < count; ++k, ++global) {
            Frame frame;
            frame.timestamp_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(global) * 1000.0 / script.fps));
            const double tau = static_cast<double>(frame.timestamp_ms) / 1000.0 - phase_start_s;
            const Vec3 mid{0.0, script.palm_height_mm, 0.0};
            const auto base = [&](Handedness h, double sep) -> Vec3 { return mid + Vec3(side(h) * sep / 2.0, 0.0, 0.0); };

            switch (p.kind) {
                case PhaseKind::Idle:
                case PhaseKind::FacingHold: {
                    const bool facing = p.kind == PhaseKind::FacingHold && p.palms_facing;
                    for (Handedness h : {Handedness::Left, Handedness::Right}) {
                        frame.hands.push_back(facing ? make_hand(h, base(h, separation), facing_normal(h), Vec3::Zero(),
                                                                 kClosedFingerSpacingMm, kUp, Vec3::UnitZ())
                                                     : make_hand(h, base(h, separation), kDown, Vec3::Zero(),
                                                                 kClosedFingerSpacingMm, kAway, Vec3::UnitX()));
                    }
                    break;
                }
                case PhaseKind::Approach: {
                    double sep = start_sep - speed * tau;
                    double v = speed;
                    if (sep <= script.contact_separation_mm && start_sep > script.contact_separation_mm) {
                        sep = script.contact_separation_mm;
                        v = 0.0;
                    }
                    separation = sep;
                    for (Handedness h : {Handedness::Left, Handedness::Right}) {
                        const Vec3 vel(-side(h) * v / 2.0, 0.0, 0.0);
                        frame.hands.push_back(p.palms_facing ? make_hand(h, base(h, sep), facing_normal(h), vel,
                                                                         kClosedFingerSpacingMm, kUp, Vec3::UnitZ())
                                                             : make_hand(h, base(h, sep), kDown, vel,
                                                                         kClosedFingerSpacingMm, kAway, Vec3::UnitX()));
                    }
                    break;
                }
                case PhaseKind::RubCircular:
                case PhaseKind::Primitive: {
                    const Motion m = contact_motion(p, tau);
                    const Vec3 lead_pos = base(lead, separation) + m.offset;
                    const Vec3 follow_pos = 2.0 * mid - lead_pos;
                    const bool occluded = script.occlusion == OcclusionModel::DropOneHandOnContact &&
                                          separation < kOcclusionSeparationMm;
                    auto lead_hand = make_hand(lead, lead_pos, facing_normal(lead), m.velocity,
                                               kClosedFingerSpacingMm, kUp, Vec3::UnitZ());
                    if (occluded) {
                        frame.hands.push_back(std::move(lead_hand));
                    } else {
                        auto follow_hand = make_hand(follow, follow_pos, facing_normal(follow), -m.velocity,
                                                     kClosedFingerSpacingMm, kUp, Vec3::UnitZ());
                        if (lead == Handedness::Left) {
                            frame.hands = {std::move(lead_hand), std::move(follow_hand)};
                        } else {
                            frame.hands = {std::move(follow_hand), std::move(lead_hand)};
                        }
                    }
                    break;
                }
                case PhaseKind::Stage3Linear: {
                    const double w = kTwoPi * p.rub_frequency_hz;
                    const Vec3 under = mid;
                    const Vec3 over = mid + Vec3(p.rub_radius_mm * std::sin(w * tau), kStackOffsetMm, 0.0);
                    const Vec3 vel(p.rub_radius_mm * w * std::cos(w * tau), 0.0, 0.0);
                    frame.hands.push_back(make_hand(Handedness::Left, under, kDown, Vec3::Zero(),
                                                    kOpenFingerSpacingMm, kAway, Vec3::UnitX()));
                    frame.hands.push_back(make_hand(Handedness::Right, over, kDown, vel, kOpenFingerSpacingMm,
                                                    kAway, Vec3::UnitX()));
                    break;
                }
            }
            out.stream.frames.push_back(std::move(frame));
            out.labels.push_back({p.kind, pi});
        }
    }
    add_noise(out.stream, script.noise_sigma_mm, script.seed);
    return out;
}

LabeledStream perturb(const LabeledStream& input, const Perturbation& perturbation) {
    LabeledStream out;
    out.stream.nominal_fps = input.stream.nominal_fps;
    const auto& frames = input.stream.frames;

    if (const auto* noise = std::get_if<AddNoise>(&perturbation)) {
        out = input;
        add_noise(out.stream, noise->sigma_mm, noise->seed);
        return out;
    }
    if (const auto* remove = std::get_if<RemovePhaseFrames>(&perturbation)) {
        if (input.labels.size() != frames.size()) {
            throw Error(ErrorKind::InvalidArgument, "stream has no per-frame labels");
        }
        bool found = false;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            if (input.labels[i].kind == remove->phase) {
                found = true;
                continue;
            }
            out.stream.frames.push_back(frames[i]);
            out.labels.push_back(input.labels[i]);
        }
        if (!found) {
            throw Error(ErrorKind::UnknownPhase, "no frames labelled " + std::string(to_string(remove->phase)));
        }
        return out;
    }
    if (std::holds_alternative<SuppressOcclusion>(perturbation)) {
        out = input;
        std::optional<Vec3> midpoint;
        for (auto& frame : out.stream.frames) {
            if (frame.hand_count() == 2) {
                midpoint = (frame.hands[0].palm_position + frame.hands[1].palm_position) / 2.0;
                continue;
            }
            if (frame.hand_count() != 1 || !midpoint) {
                continue;
            }
            const auto& seen = frame.hands.front();
            HandObservation hidden = seen;
            hidden.handedness = other(seen.handedness);
            hidden.palm_position = 2.0 * *midpoint - seen.palm_position;
            hidden.palm_velocity = -seen.palm_velocity;
            hidden.palm_normal = -seen.palm_normal;
            for (auto& tip : hidden.fingertips) {
                if (tip) {
                    *tip = 2.0 * *midpoint - *tip;
                }
            }
            if (hidden.handedness == Handedness::Left) {
                frame.hands.insert(frame.hands.begin(), std::move(hidden));
            } else {
                frame.hands.push_back(std::move(hidden));
            }
        }
        return out;
    }
    const auto& drop = std::get<DropFrames>(perturbation);
    if (!(drop.rate >= 0.0 && drop.rate <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "drop rate outside [0,1]");
    }
    std::mt19937_64 rng(drop.seed);
    std::bernoulli_distribution dropped(drop.rate);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (dropped(rng)) {
            continue;
        }
        out.stream.frames.push_back(frames[i]);
        if (i < input.labels.size()) {
            out.labels.push_back(input.labels[i]);
        }
    }
    return out;
}

PrimitiveTrace generate_primitive(PrimitiveKind kind, const PrimitiveParams& params) {
    if (!(params.fps > 0.0) || !(params.duration_s > 0.0) || !(params.amplitude_mm >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "primitive needs fps > 0, duration > 0, amplitude >= 0");
    }
    if (params.axis.norm() == 0.0 || params.plane_normal.norm() == 0.0) {
        throw Error(ErrorKind::InvalidArgument, "primitive axes must be non-zero");
    }
    const std::size_t n =
        params.samples.value_or(static_cast<std::size_t>(std::llround(params.duration_s * params.fps)) + 1);
    const Vec3 axis = params.axis.normalized();
    const Vec3 normal = params.plane_normal.normalized();
    // First in-plane axis: the requested axis with any normal component removed.
    Vec3 u = axis - axis.dot(normal) * normal;
    if (u.norm() < 1e-9) {
        u = normal.unitOrthogonal();
    }
    u.normalize();
    const Vec3 v = normal.cross(u);
    const double w = kTwoPi * params.frequency_hz;

    PrimitiveTrace trace;
    trace.positions.reserve(n);
    trace.timestamps_ms.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto ts = static_cast<std::int64_t>(std::llround(static_cast<double>(k) * 1000.0 / params.fps));
        const double t = static_cast<double>(ts) / 1000.0;
        Vec3 p = params.center;
        switch (kind) {
            case PrimitiveKind::Sinusoid1D:
                p += params.amplitude_mm * std::sin(w * t + params.phase_rad) * axis;
                break;
            case PrimitiveKind::Circle:
                p += params.amplitude_mm * (std::cos(w * t + params.phase_rad) * u + std::sin(w * t + params.phase_rad) * v);
                break;
            case PrimitiveKind::Line: {
                const double frac = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
                p += params.amplitude_mm * (2.0 * frac - 1.0) * axis;
                break;
            }
            case PrimitiveKind::Static:
                break;
        }
        trace.positions.push_back(p);
        trace.timestamps_ms.push_back(ts);
    }
    return trace;
}

GestureScript canonical_stage2_script(double rub_frequency_hz, double rub_duration_s, double noise_sigma_mm,
                                      std::uint64_t seed) {
    GestureScript s;
    s.noise_sigma_mm = noise_sigma_mm;
    s.seed = seed;
    PhaseSpec hold;
    hold.kind = PhaseKind::FacingHold;
    hold.duration_s = 1.0;
    PhaseSpec approach;
    approach.kind = PhaseKind::Approach;
    approach.duration_s = 1.0;
    approach.start_separation_mm = 150.0;
    PhaseSpec rub;
    rub.kind = PhaseKind::RubCircular;
    rub.duration_s = rub_duration_s;
    rub.rub_frequency_hz = rub_frequency_hz;
    s.phases = {hold, approach, rub};
    return s;
}

GestureScript stage3_script(double frequency_hz, double duration_s, double noise_sigma_mm, std::uint64_t seed) {
    GestureScript s;
    s.noise_sigma_mm = noise_sigma_mm;
    s.seed = seed;
    s.occlusion = OcclusionModel::None;
    PhaseSpec p;
    p.kind = PhaseKind::Stage3Linear;
    p.rub_radius_mm = kStage3StrokeMm;
    p.duration_s = duration_s;
    p.rub_frequency_hz = frequency_hz;
    s.phases = {p};
    return s;
}

namespace {

PhaseKind parse_phase_kind(std::string_view name) {
    for (auto k : {PhaseKind::Idle, PhaseKind::FacingHold, PhaseKind::Approach, PhaseKind::RubCircular,
                   PhaseKind::Stage3Linear, PhaseKind::Primitive}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw Error(ErrorKind::UnknownPhase, "unknown phase kind '" + std::string(name) + "'");
}

PrimitiveKind parse_primitive_kind(std::string_view name) {
    for (auto k : {PrimitiveKind::Sinusoid1D, PrimitiveKind::Circle, PrimitiveKind::Line, PrimitiveKind::Static}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    bad_script("unknown primitive '" + std::string(name) + "'");
}

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    bad_script("'" + std::string(v) + "' is not a boolean");
}

PhaseSpec parse_phase(std::string_view value) {
    const auto attrs = split_attributes(value);
    if (attrs.empty() || !attrs.front().second.empty()) {
        bad_script("phase line must start with a phase kind");
    }
    PhaseSpec p;
    p.kind = parse_phase_kind(attrs.front().first);
    for (std::size_t i = 1; i < attrs.size(); ++i) {
        const auto& [k, v] = attrs[i];
        if (k == "duration") {
            p.duration_s = parse_double(v, k);
        } else if (k == "frequency") {
            p.rub_frequency_hz = parse_double(v, k);
        } else if (k == "radius") {
            p.rub_radius_mm = parse_double(v, k);
        } else if (k == "speed") {
            p.approach_speed_mm_s = parse_double(v, k);
        } else if (k == "start_separation") {
            p.start_separation_mm = parse_double(v, k);
        } else if (k == "facing") {
            p.palms_facing = parse_bool(v);
        } else if (k == "primitive") {
            p.primitive = parse_primitive_kind(v);
        } else {
            bad_script("unknown phase attribute '" + k + "'");
        }
    }
    return p;
}

}  // namespace

GestureScript parse_script(std::string_view text, std::string_view source) {
    GestureScript s;
    for (const auto& kv : parse_kv(text, source)) {
        try {
            if (kv.key == "fps") {
                s.fps = parse_double(kv.value, kv.key);
            } else if (kv.key == "noise_sigma") {
                s.noise_sigma_mm = parse_double(kv.value, kv.key);
            } else if (kv.key == "occlusion") {
                if (kv.value == "none") {
                    s.occlusion = OcclusionModel::None;
                } else if (kv.value == "drop_one_hand_on_contact") {
                    s.occlusion = OcclusionModel::DropOneHandOnContact;
                } else {
                    bad_script("unknown occlusion model '" + kv.value + "'");
                }
            } else if (kv.key == "survivor") {
                if (kv.value == "left") {
                    s.survivor = Handedness::Left;
                } else if (kv.value == "right") {
                    s.survivor = Handedness::Right;
                } else {
                    bad_script("survivor must be left or right");
                }
            } else if (kv.key == "seed") {
                const auto seed = parse_int(kv.value, kv.key);
                if (seed < 0) {
                    bad_script("seed must be >= 0");
                }
                s.seed = static_cast<std::uint64_t>(seed);
            } else if (kv.key == "start_separation_mm") {
                s.start_separation_mm = parse_double(kv.value, kv.key);
            } else if (kv.key == "contact_separation_mm") {
                s.contact_separation_mm = parse_double(kv.value, kv.key);
            } else if (kv.key == "palm_height_mm") {
                s.palm_height_mm = parse_double(kv.value, kv.key);
            } else if (kv.key == "phase") {
                s.phases.push_back(parse_phase(kv.value));
            } else {
                bad_script("unknown key '" + kv.key + "'");
            }
        } catch (const Error& e) {
            Error wrapped(e.kind() == ErrorKind::UnknownPhase ? ErrorKind::UnknownPhase : ErrorKind::InvalidScript,
                          e.message());
            wrapped.at_line(kv.line);
            if (!source.empty()) {
                wrapped.in_source(std::string(source));
            }
            throw wrapped;
        }
    }
    validate_script(s);
    return s;
}

std::string script_to_text(const GestureScript& s) {
    std::string out;
    out += "fps = " + format_double(s.fps) + "\n";
    out += "noise_sigma = " + format_double(s.noise_sigma_mm) + "\n";
    out += std::string("occlusion = ") +
           (s.occlusion == OcclusionModel::None ? "none" : "drop_one_hand_on_contact") + "\n";
    out += std::string("survivor = ") + (s.survivor == Handedness::Left ? "left" : "right") + "\n";
    out += "seed = " + std::to_string(s.seed) + "\n";
    out += "start_separation_mm = " + format_double(s.start_separation_mm) + "\n";
    out += "contact_separation_mm = " + format_double(s.contact_separation_mm) + "\n";
    out += "palm_height_mm = " + format_double(s.palm_height_mm) + "\n";
    for (const auto& p : s.phases) {
        out += "phase = " + std::string(to_string(p.kind)) + " duration=" + format_double(p.duration_s) +
               " frequency=" + format_double(p.rub_frequency_hz) + " radius=" + format_double(p.rub_radius_mm);
        if (p.approach_speed_mm_s) {
            out += " speed=" + format_double(*p.approach_speed_mm_s);
        }
        if (p.start_separation_mm) {
            out += " start_separation=" + format_double(*p.start_separation_mm);
        }
        out += std::string(" facing=") + (p.palms_facing ? "true" : "false");
        out += " primitive=" + std::string(to_string(p.primitive));
        out += "\n";
    }
    return out;
}

}  // namespace hge

#include "hge/frame_model.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "hge/error.hpp"

namespace hge {

std::string_view to_string(Handedness h) {
    return h == Handedness::Left ? "Left" : "Right";
}

const HandObservation* Frame::find(Handedness h) const noexcept {
    for (const auto& hand : hands) {
        if (hand.handedness == h) {
            return &hand;
        }
    }
    return nullptr;
}

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

HandObservation validate_hand(HandObservation hand) {
    if (!finite(hand.palm_position) || !finite(hand.palm_velocity) || !finite(hand.palm_normal) ||
        !std::isfinite(hand.grab_strength)) {
        throw Error(ErrorKind::InvalidFrame, "non-finite value in " + std::string(to_string(hand.handedness)) + " hand");
    }
    for (const auto& tip : hand.fingertips) {
        if (tip && !finite(*tip)) {
            throw Error(ErrorKind::InvalidFrame, "non-finite fingertip");
        }
    }
    if (hand.grab_strength < 0.0 || hand.grab_strength > 1.0) {
        throw Error(ErrorKind::GrabOutOfRange, "grab_strength " + format_double(hand.grab_strength) + " outside [0,1]");
    }
    const double norm = hand.palm_normal.norm();
    const double deviation = std::abs(norm - 1.0);
    if (deviation > kNormalTolerance) {
        throw Error(ErrorKind::NonUnitNormal, "|palm_normal| = " + format_double(norm));
    }
    if (deviation > 0.0) {
        hand.palm_normal /= norm;
    }
    return hand;
}

Frame validate_frame(Frame raw) {
    if (raw.timestamp_ms < 0) {
        throw Error(ErrorKind::InvalidFrame, "negative timestamp " + std::to_string(raw.timestamp_ms));
    }
    if (raw.hands.size() > 2) {
        throw Error(ErrorKind::InvalidFrame, std::to_string(raw.hands.size()) + " hands in one frame");
    }
    if (raw.hands.size() == 2 && raw.hands[0].handedness == raw.hands[1].handedness) {
        throw Error(ErrorKind::DuplicateHandedness,
                    "two " + std::string(to_string(raw.hands[0].handedness)) + " hands");
    }
    for (auto& hand : raw.hands) {
        hand = validate_hand(std::move(hand));
    }
    return raw;
}

namespace {

void check_sorted(std::span<const TimedHand> records, Handedness expected) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].hand.handedness != expected) {
            throw Error(ErrorKind::InvalidFrame, "record " + std::to_string(i) + " in the " +
                                                     std::string(to_string(expected)) +
                                                     " sequence has the wrong handedness");
        }
        if (i > 0 && records[i].timestamp_ms <= records[i - 1].timestamp_ms) {
            throw Error(ErrorKind::NonMonotonicTimestamp,
                        std::string(to_string(expected)) + " record " + std::to_string(i) + " at " +
                            std::to_string(records[i].timestamp_ms) + " ms");
        }
    }
}

}  // namespace

FrameStream merge_hand_streams(std::span<const TimedHand> left, std::span<const TimedHand> right,
                               std::int64_t window_ms) {
    check_sorted(left, Handedness::Left);
    check_sorted(right, Handedness::Right);

    FrameStream out;
    out.frames.reserve(std::max(left.size(), right.size()));
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < left.size() || j < right.size()) {
        if (i == left.size()) {
            out.frames.push_back({right[j].timestamp_ms, {right[j].hand}});
            ++j;
            continue;
        }
        if (j == right.size()) {
            out.frames.push_back({left[i].timestamp_ms, {left[i].hand}});
            ++i;
            continue;
        }
        const auto tl = left[i].timestamp_ms;
        const auto tr = right[j].timestamp_ms;
        const bool left_first = tl <= tr;
        // The earlier record pairs with the other head unless its own
        // successor is at or before that head (the successor is the closer match).
        bool pair = std::abs(tl - tr) <= window_ms;
        if (pair) {
            if (left_first && tl != tr && i + 1 < left.size() && left[i + 1].timestamp_ms <= tr) {
                pair = false;
            }
            if (!left_first && j + 1 < right.size() && right[j + 1].timestamp_ms <= tl) {
                pair = false;
            }
        }
        if (pair) {
            out.frames.push_back({tl, {left[i].hand, right[j].hand}});
            ++i;
            ++j;
        } else if (left_first) {
            out.frames.push_back({tl, {left[i].hand}});
            ++i;
        } else {
            out.frames.push_back({tr, {right[j].hand}});
            ++j;
        }
    }
    out.nominal_fps = estimate_fps(out.frames);
    return out;
}

double estimate_fps(std::span<const Frame> frames) {
    if (frames.size() < 2) {
        return 0.0;
    }
    const auto span_ms = frames.back().timestamp_ms - frames.front().timestamp_ms;
    if (span_ms <= 0) {
        return 0.0;
    }
    return static_cast<double>(frames.size() - 1) / (static_cast<double>(span_ms) / 1000.0);
}

namespace {

std::vector<std::string> make_columns() {
    std::vector<std::string> cols{"timestamp_ms", "palm_x",   "palm_y", "palm_z",
                                  "normal_x",     "normal_y", "normal_z", "vel_x",
                                  "vel_y",        "vel_z",    "grab_strength"};
    for (auto finger : kFingerNames) {
        for (const char* axis : {"_x", "_y", "_z"}) {
            cols.push_back(std::string(finger) + axis);
        }
    }
    return cols;
}

const std::vector<std::string>& columns() {
    static const std::vector<std::string> cols = make_columns();
    return cols;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

Error malformed(std::size_t line, std::size_t col, std::string_view source, std::string message) {
    Error e(ErrorKind::MalformedRow, std::move(message));
    e.at_line(line).at_column(columns()[col]);
    if (!source.empty()) {
        e.in_source(std::string(source));
    }
    return e;
}

double parse_number(std::string_view cell, std::size_t line, std::size_t col, std::string_view source) {
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw malformed(line, col, source, "cannot parse '" + std::string(cell) + "' as a number");
    }
    return value;
}

Vec3 parse_vec(const std::vector<std::string_view>& cells, std::size_t first, std::size_t line,
               std::string_view source) {
    return {parse_number(cells[first], line, first, source), parse_number(cells[first + 1], line, first + 1, source),
            parse_number(cells[first + 2], line, first + 2, source)};
}

}  // namespace

const std::string& csv_header() {
    static const std::string header = [] {
        std::string h;
        for (const auto& c : columns()) {
            if (!h.empty()) {
                h += ',';
            }
            h += c;
        }
        return h;
    }();
    return header;
}

std::vector<TimedHand> parse_hand_csv(std::string_view text, Handedness handedness, std::string_view source) {
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    for (auto& l : lines) {
        if (!l.empty() && l.back() == '\r') {
            l.remove_suffix(1);
        }
    }
    if (lines.empty() || lines.front() != csv_header()) {
        Error e(ErrorKind::HeaderMismatch, "expected header '" + csv_header() + "'");
        e.at_line(1);
        if (!source.empty()) {
            e.in_source(std::string(source));
        }
        throw e;
    }

    const std::size_t ncols = columns().size();
    std::vector<TimedHand> records;
    records.reserve(lines.size() - 1);
    for (std::size_t idx = 1; idx < lines.size(); ++idx) {
        const std::size_t line_no = idx + 1;
        const auto cells = split(lines[idx], ',');
        if (cells.size() < ncols) {
            throw malformed(line_no, cells.size(), source,
                            "row has " + std::to_string(cells.size()) + " of " + std::to_string(ncols) + " columns");
        }
        if (cells.size() > ncols) {
            throw malformed(line_no, ncols - 1, source,
                            "row has " + std::to_string(cells.size()) + " columns, expected " + std::to_string(ncols));
        }

        TimedHand rec;
        {
            const auto cell = cells[0];
            const auto* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, rec.timestamp_ms);
            if (cell.empty() || ec != std::errc{} || ptr != end || rec.timestamp_ms < 0) {
                throw malformed(line_no, 0, source, "bad timestamp '" + std::string(cell) + "'");
            }
        }
        auto& hand = rec.hand;
        hand.handedness = handedness;
        hand.palm_position = parse_vec(cells, 1, line_no, source);
        hand.palm_normal = parse_vec(cells, 4, line_no, source);
        hand.palm_velocity = parse_vec(cells, 7, line_no, source);
        hand.grab_strength = parse_number(cells[10], line_no, 10, source);
        for (std::size_t f = 0; f < kFingerCount; ++f) {
            const std::size_t first = 11 + 3 * f;
            const bool all_empty = cells[first].empty() && cells[first + 1].empty() && cells[first + 2].empty();
            if (!all_empty) {
                hand.fingertips[f] = parse_vec(cells, first, line_no, source);
            }
        }

        try {
            hand = validate_hand(std::move(hand));
        } catch (Error& e) {
            e.at_line(line_no);
            if (!source.empty()) {
                e.in_source(std::string(source));
            }
            throw;
        }
        if (!records.empty() && rec.timestamp_ms <= records.back().timestamp_ms) {
            Error e(ErrorKind::NonMonotonicTimestamp, std::to_string(rec.timestamp_ms) + " ms after " +
                                                          std::to_string(records.back().timestamp_ms) + " ms");
            e.at_line(line_no);
            if (!source.empty()) {
                e.in_source(std::string(source));
            }
            throw e;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

FrameStream parse_csv_stream(std::string_view left_text, std::string_view right_text, std::int64_t merge_window_ms) {
    const auto left = parse_hand_csv(left_text, Handedness::Left, "left");
    const auto right = parse_hand_csv(right_text, Handedness::Right, "right");
    return merge_hand_streams(left, right, merge_window_ms);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return {buf, ptr};
}

namespace {

void append_vec(std::string& row, const Vec3& v) {
    for (int k = 0; k < 3; ++k) {
        row += ',';
        row += format_double(v[k]);
    }
}

void append_row(std::string& out, std::int64_t timestamp, const HandObservation& hand) {
    out += std::to_string(timestamp);
    append_vec(out, hand.palm_position);
    append_vec(out, hand.palm_normal);
    append_vec(out, hand.palm_velocity);
    out += ',';
    out += format_double(hand.grab_strength);
    for (const auto& tip : hand.fingertips) {
        if (tip) {
            append_vec(out, *tip);
        } else {
            out += ",,,";
        }
    }
    out += '\n';
}

}  // namespace

CsvPair write_csv_stream(const FrameStream& stream) {
    CsvPair out;
    out.left = csv_header() + '\n';
    out.right = out.left;
    for (const auto& frame : stream.frames) {
        if (const auto* l = frame.left()) {
            append_row(out.left, frame.timestamp_ms, *l);
        }
        if (const auto* r = frame.right()) {
            append_row(out.right, frame.timestamp_ms, *r);
        }
    }
    return out;
}

}  // namespace hge

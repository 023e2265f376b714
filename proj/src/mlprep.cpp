#include "hge/mlprep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hge/error.hpp"

namespace hge {
namespace {

std::optional<double> aggregate(std::vector<double> values, Aggregation how) {
    if (values.empty()) {
        return std::nullopt;
    }
    if (how == Aggregation::Median) {
        const auto mid = values.size() / 2;
        std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
        if (values.size() % 2 == 1) {
            return values[mid];
        }
        const double upper = values[mid];
        const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
        return (lower + upper) / 2.0;
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

struct HandColumns {
    std::vector<double> curvature;
    std::vector<double> fingertip;
};

HandColumns columns_for(std::span<const Frame> frames, Handedness h, double open_min) {
    HandColumns c;
    for (const auto& f : frames) {
        if (const auto* hand = f.find(h)) {
            c.curvature.push_back(hand->grab_strength);
            if (auto s = finger_spread(hand->fingertips, open_min); s.min_adjacent_distance_mm) {
                c.fingertip.push_back(*s.min_adjacent_distance_mm);
            }
        }
    }
    return c;
}

std::string cell(const std::optional<double>& v) {
    if (!v) {
        return {};
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", *v);
    return buf;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::vector<DatasetRow> build_dataset(std::span<const LabeledWindow> windows, const Config& config) {
    std::vector<DatasetRow> rows;
    rows.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (w.label.empty()) {
            throw Error(ErrorKind::InvalidArgument, "window " + std::to_string(i) + " has an empty label");
        }
        FeatureVector fv;
        try {
            fv = extract_feature_vector(w.frames, config.features);
        } catch (Error& e) {
            if (e.kind() == ErrorKind::InsufficientWindow) {
                throw Error(ErrorKind::InsufficientWindow, "window " + std::to_string(i) + ": " + e.message());
            }
            throw;
        }
        DatasetRow row;
        row.sample_no = i + 1;
        const auto left = columns_for(w.frames, Handedness::Left, config.features.open_spread_min_mm);
        const auto right = columns_for(w.frames, Handedness::Right, config.features.open_spread_min_mm);
        row.curvature_left = aggregate(left.curvature, config.aggregation);
        row.curvature_right = aggregate(right.curvature, config.aggregation);
        row.fingertip_distance_left_mm = aggregate(left.fingertip, config.aggregation);
        row.fingertip_distance_right_mm = aggregate(right.fingertip, config.aggregation);
        row.orientation = fv.palm_orientation;
        row.trajectory = fv.trajectory;
        row.frequency_hz = fv.movement_frequency_hz;
        std::vector<double> ipd;
        for (const auto& f : w.frames) {
            if (const auto *l = f.left(), *r = f.right(); l && r) {
                ipd.push_back(inter_palm_distance(l->palm_position, r->palm_position));
            }
        }
        row.inter_palm_distance_mm = aggregate(std::move(ipd), config.aggregation);
        row.label = w.label;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string dataset_to_csv(std::span<const DatasetRow> rows) {
    std::string out = std::string(kDatasetHeader) + "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.sample_no);
        for (const auto& v : {r.curvature_left, r.curvature_right, r.fingertip_distance_left_mm,
                              r.fingertip_distance_right_mm}) {
            out += ',' + cell(v);
        }
        out += ',' + std::to_string(static_cast<int>(r.orientation));
        out += ',' + std::to_string(static_cast<int>(r.trajectory));
        out += ',' + cell(r.frequency_hz);
        out += ',' + cell(r.inter_palm_distance_mm);
        out += ',' + quote(r.label);
        out += '\n';
    }
    return out;
}

}  // namespace hge

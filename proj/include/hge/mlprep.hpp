#pragma once

// Labelled two-hand feature rows for training a classifier elsewhere.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hge/config.hpp"
#include "hge/features.hpp"
#include "hge/frame_model.hpp"

namespace hge {

struct LabeledWindow {
    std::span<const Frame> frames;
    std::string label;
};

/// Absent cells (a hand never seen, no two-hand frame) are written empty.
struct DatasetRow {
    std::size_t sample_no{0};
    std::optional<double> curvature_left;
    std::optional<double> curvature_right;
    std::optional<double> fingertip_distance_left_mm;
    std::optional<double> fingertip_distance_right_mm;
    PalmOrientation orientation{PalmOrientation::Other};
    Trajectory trajectory{Trajectory::Indeterminate};
    std::optional<double> frequency_hz;
    std::optional<double> inter_palm_distance_mm;
    std::string label;
};

/// One row per window, in input order, numbered from 1. Throws
/// Error(InsufficientWindow) naming the failing window index.
std::vector<DatasetRow> build_dataset(std::span<const LabeledWindow> windows, const Config& config = {});

inline constexpr const char* kDatasetHeader = "sample_no,curv_l,curv_r,ftd_l,ftd_r,orient,traj,freq_hz,ipd_mm,label";

/// Orientation and trajectory are written as integer codes in enum order.
std::string dataset_to_csv(std::span<const DatasetRow> rows);

}  // namespace hge

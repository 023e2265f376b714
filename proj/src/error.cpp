#include "hge/error.hpp"

namespace hge {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DuplicateHandedness: return "DuplicateHandedness";
        case ErrorKind::NonUnitNormal: return "NonUnitNormal";
        case ErrorKind::GrabOutOfRange: return "GrabOutOfRange";
        case ErrorKind::InvalidFrame: return "InvalidFrame";
        case ErrorKind::MalformedRow: return "MalformedRow";
        case ErrorKind::HeaderMismatch: return "HeaderMismatch";
        case ErrorKind::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::InsufficientWindow: return "InsufficientWindow";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::OutOfOrderFrame: return "OutOfOrderFrame";
        case ErrorKind::InvalidScript: return "InvalidScript";
        case ErrorKind::UnknownPhase: return "UnknownPhase";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, std::string message)
    : std::runtime_error(message), kind_(kind), message_(std::move(message)) {
    refresh();
}

void Error::refresh() {
    what_.clear();
    if (source) {
        what_ += *source;
        what_ += line ? ":" + std::to_string(*line) : std::string{};
        what_ += ": ";
    } else if (line) {
        what_ += "line " + std::to_string(*line) + ": ";
    }
    if (frame_index) {
        what_ += "frame " + std::to_string(*frame_index) + ": ";
    }
    what_ += to_string(kind_);
    if (column) {
        what_ += " (column " + *column + ")";
    }
    if (!message_.empty()) {
        what_ += ": " + message_;
    }
}

}  // namespace hge

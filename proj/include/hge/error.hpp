#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hge {

enum class ErrorKind {
    DuplicateHandedness,
    NonUnitNormal,
    GrabOutOfRange,
    InvalidFrame,
    MalformedRow,
    HeaderMismatch,
    NonMonotonicTimestamp,
    TooFewSamples,
    InsufficientWindow,
    InvalidArgument,
    OutOfOrderFrame,
    InvalidScript,
    UnknownPhase,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the engine. Location fields are filled in
/// by whichever layer knows them (parser line, frame index, file name).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

    std::optional<std::size_t> line;
    std::optional<std::string> column;
    std::optional<std::size_t> frame_index;
    std::optional<std::string> source;

    Error& at_line(std::size_t l) { line = l; refresh(); return *this; }
    Error& at_column(std::string c) { column = std::move(c); refresh(); return *this; }
    Error& at_frame(std::size_t i) { frame_index = i; refresh(); return *this; }
    Error& in_source(std::string s) { source = std::move(s); refresh(); return *this; }

    [[nodiscard]] const char* what() const noexcept override { return what_.c_str(); }

private:
    void refresh();

    ErrorKind kind_;
    std::string message_;
    std::string what_;
};

}  // namespace hge

#pragma once

// Minimal `key = value` text format shared by config files, synth scripts
// and the mlprep manifest. '#' starts a comment; blank lines are ignored.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hge {

struct KvLine {
    std::size_t line{0};
    std::string key;
    std::string value;
};

std::vector<KvLine> parse_kv(std::string_view text, std::string_view source = {});

/// Splits "a=1 b=2" into pairs; bare words are returned with an empty value.
std::vector<std::pair<std::string, std::string>> split_attributes(std::string_view text);

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

std::string trim(std::string_view s);

/// Reads a whole file; throws Error(Io) on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace hge

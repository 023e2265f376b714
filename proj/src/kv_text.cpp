#include "hge/kv_text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hge/error.hpp"

namespace hge {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<KvLine> parse_kv(std::string_view text, std::string_view source) {
    std::vector<KvLine> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        auto line = text.substr(start, end - start);
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const auto stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            Error e(ErrorKind::InvalidConfig, "expected 'key = value', got '" + stripped + "'");
            e.at_line(line_no);
            if (!source.empty()) {
                e.in_source(std::string(source));
            }
            throw e;
        }
        out.push_back({line_no, trim(std::string_view(stripped).substr(0, eq)),
                       trim(std::string_view(stripped).substr(eq + 1))});
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> split_attributes(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            out.emplace_back(token, std::string{});
        } else {
            out.emplace_back(token.substr(0, eq), token.substr(eq + 1));
        }
    }
    return out;
}

double parse_double(std::string_view text, std::string_view what) {
    const std::string trimmed = trim(text);
    text = trimmed;
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw Error(ErrorKind::InvalidArgument, "'" + std::string(text) + "' is not a number for " + std::string(what));
    }
    return value;
}

long long parse_int(std::string_view text, std::string_view what) {
    const std::string trimmed = trim(text);
    text = trimmed;
    long long value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw Error(ErrorKind::InvalidArgument, "'" + std::string(text) + "' is not an integer for " + std::string(what));
    }
    return value;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path);
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw Error(ErrorKind::Io, "write failed for " + path);
    }
}

}  // namespace hge

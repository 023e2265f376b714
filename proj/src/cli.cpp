#include "hge/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "CLI11.hpp"

#include "hge/config.hpp"
#include "hge/error.hpp"
#include "hge/features.hpp"
#include "hge/frame_model.hpp"
#include "hge/kv_text.hpp"
#include "hge/mlprep.hpp"
#include "hge/stage_detector.hpp"
#include "hge/synth.hpp"

namespace hge::cli {
namespace {

Config resolve_config(const std::string& flag) {
    if (!flag.empty()) {
        return load_config_file(flag);
    }
    if (const char* env = std::getenv("HGE_CONFIG"); env && *env) {
        return load_config_file(env);
    }
    return {};
}

FrameStream load_stream(const std::string& left_path, const std::string& right_path, const Config& config) {
    const auto left = parse_hand_csv(read_file(left_path), Handedness::Left, left_path);
    const auto right = parse_hand_csv(read_file(right_path), Handedness::Right, right_path);
    return merge_hand_streams(left, right, config.merge_window_ms);
}

std::span<const Frame> slice(const FrameStream& stream, std::int64_t start_ms, std::int64_t end_ms) {
    const auto& f = stream.frames;
    const auto lo = std::lower_bound(f.begin(), f.end(), start_ms,
                                     [](const Frame& fr, std::int64_t t) { return fr.timestamp_ms < t; });
    const auto hi = std::upper_bound(f.begin(), f.end(), end_ms,
                                     [](std::int64_t t, const Frame& fr) { return t < fr.timestamp_ms; });
    return {f.data() + (lo - f.begin()), static_cast<std::size_t>(hi - lo)};
}

std::string opt(const std::optional<double>& v, int digits = 3) {
    if (!v) {
        return "none";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, *v);
    return buf;
}

template <typename T>
std::string opt_enum(const std::optional<T>& v) {
    return v ? std::string(to_string(*v)) : "none";
}

std::string feature_record(const FeatureVector& fv) {
    const auto s2 = match_signature(fv, stage2_signature());
    const auto s3 = match_signature(fv, stage3_signature());
    std::string r;
    r += "orientation=" + std::string(to_string(fv.palm_orientation));
    r += " shape_l=" + opt_enum(fv.palm_shape_left);
    r += " shape_r=" + opt_enum(fv.palm_shape_right);
    r += " spread_l=" + std::string(to_string(fv.finger_spread_left));
    r += " spread_r=" + std::string(to_string(fv.finger_spread_right));
    r += " trajectory=" + std::string(to_string(fv.trajectory));
    r += " frequency_hz=" + opt(fv.movement_frequency_hz);
    r += " ipd_mm=" + opt(fv.inter_palm_distance_mm, 1);
    r += " span_s=" + opt(fv.window_span_s);
    r += " stage2=" + std::string(s2.match ? "match" : "no") + "/" + opt(s2.score, 2);
    r += " stage3=" + std::string(s3.match ? "match" : "no") + "/" + opt(s3.score, 2);
    return r;
}

struct ManifestEntry {
    std::string left;
    std::string right;
    std::optional<std::int64_t> start_ms;
    std::optional<std::int64_t> end_ms;
    std::string label;
};

// One window per line: left_csv,right_csv,start_ms,end_ms,label
// Empty start/end select the whole stream; paths resolve against the manifest.
std::vector<ManifestEntry> parse_manifest(const std::string& path) {
    const auto text = read_file(path);
    const auto dir = std::filesystem::path(path).parent_path();
    std::vector<ManifestEntry> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        ++line_no;
        const auto line = trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (int k = 0; k < 4; ++k) {
            const auto comma = line.find(',', start);
            if (comma == std::string::npos) {
                Error e(ErrorKind::MalformedRow, "expected left,right,start_ms,end_ms,label");
                throw e.at_line(line_no).in_source(path);
            }
            cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
            start = comma + 1;
        }
        cells.push_back(trim(std::string_view(line).substr(start)));
        ManifestEntry entry;
        const auto resolve = [&](const std::string& p) {
            const std::filesystem::path fp(p);
            return (fp.is_absolute() ? fp : dir / fp).string();
        };
        entry.left = resolve(cells[0]);
        entry.right = resolve(cells[1]);
        try {
            if (!cells[2].empty()) {
                entry.start_ms = parse_int(cells[2], "start_ms");
            }
            if (!cells[3].empty()) {
                entry.end_ms = parse_int(cells[3], "end_ms");
            }
        } catch (const Error& err) {
            Error e(ErrorKind::MalformedRow, err.message());
            throw e.at_line(line_no).in_source(path);
        }
        entry.label = cells[4];
        if (entry.label.empty()) {
            Error e(ErrorKind::MalformedRow, "empty label");
            throw e.at_line(line_no).in_source(path);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hand-hygiene gesture engine"};
    app.require_subcommand(1);

    std::string script_path, out_left, out_right;
    std::optional<std::uint64_t> seed_override;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic stream from a script");
    synth->add_option("--script", script_path, "Gesture script file")->required();
    synth->add_option("--out-left", out_left, "Left-hand CSV to write")->required();
    synth->add_option("--out-right", out_right, "Right-hand CSV to write")->required();
    synth->add_option("--seed", seed_override, "Override the script seed");

    std::string left, right, config_path, events_path, report_path;
    auto* detect = app.add_subcommand("detect", "Run the palm-to-palm stage detector");
    detect->add_option("--left", left, "Left-hand CSV")->required();
    detect->add_option("--right", right, "Right-hand CSV")->required();
    detect->add_option("--config", config_path, "Threshold config file");
    detect->add_option("--events", events_path, "Write the event stream here");
    detect->add_option("--report", report_path, "Write the structured report here");

    std::int64_t window_ms = 0;
    auto* features = app.add_subcommand("features", "Print windowed feature vectors");
    features->add_option("--left", left, "Left-hand CSV")->required();
    features->add_option("--right", right, "Right-hand CSV")->required();
    features->add_option("--window-ms", window_ms, "Window length")->required()->check(CLI::PositiveNumber);
    features->add_option("--config", config_path, "Threshold config file");

    std::string manifest_path, dataset_path;
    auto* mlprep = app.add_subcommand("mlprep", "Build a labelled feature dataset");
    mlprep->add_option("--manifest", manifest_path, "Manifest of labelled windows")->required();
    mlprep->add_option("--out", dataset_path, "Dataset CSV to write")->required();
    mlprep->add_option("--config", config_path, "Threshold config file");

    auto* validate_cmd = app.add_subcommand("validate", "Check that a CSV pair parses");
    validate_cmd->add_option("--left", left, "Left-hand CSV")->required();
    validate_cmd->add_option("--right", right, "Right-hand CSV")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (synth->parsed()) {
            auto script = parse_script(read_file(script_path), script_path);
            if (seed_override) {
                script.seed = *seed_override;
            }
            const auto generated = generate(script);
            const auto csv = write_csv_stream(generated.stream);
            write_file(out_left, csv.left);
            write_file(out_right, csv.right);
            out << "wrote " << generated.stream.frames.size() << " frames\n";
            return kExitOk;
        }
        if (detect->parsed()) {
            const auto config = resolve_config(config_path);
            const auto stream = load_stream(left, right, config);
            const auto report = detect_stage2(stream, config.detector, config.features);
            if (!events_path.empty()) {
                write_file(events_path, events_to_text(report.events));
            }
            if (!report_path.empty()) {
                write_file(report_path, report_to_text(report));
            }
            out << "verdict " << (report.verdict == Verdict::Completed ? "Completed" : "NotCompleted");
            if (report.stage_duration_s) {
                out << " stage_duration_s=" << opt(report.stage_duration_s);
            }
            if (report.failure) {
                out << " failure=" << to_string(*report.failure);
            }
            out << "\n";
            return report.verdict == Verdict::Completed ? kExitOk : kExitNotCompleted;
        }
        if (features->parsed()) {
            const auto config = resolve_config(config_path);
            const auto stream = load_stream(left, right, config);
            if (stream.frames.empty()) {
                return kExitOk;
            }
            const auto first = stream.frames.front().timestamp_ms;
            const auto last = stream.frames.back().timestamp_ms;
            for (auto start = first; start < last; start += window_ms) {
                const auto end = start + window_ms;
                const auto window = slice(stream, start, end);
                out << "start_ms=" << start << " end_ms=" << end << " ";
                try {
                    out << feature_record(extract_feature_vector(window, config.features)) << "\n";
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::InsufficientWindow) {
                        throw;
                    }
                    out << "insufficient\n";
                }
            }
            return kExitOk;
        }
        if (mlprep->parsed()) {
            const auto config = resolve_config(config_path);
            const auto entries = parse_manifest(manifest_path);
            std::vector<FrameStream> streams;
            streams.reserve(entries.size());
            std::vector<LabeledWindow> windows;
            for (const auto& e : entries) {
                streams.push_back(load_stream(e.left, e.right, config));
                const auto& s = streams.back();
                const auto lo = e.start_ms.value_or(s.frames.empty() ? 0 : s.frames.front().timestamp_ms);
                const auto hi = e.end_ms.value_or(s.frames.empty() ? 0 : s.frames.back().timestamp_ms);
                windows.push_back({slice(s, lo, hi), e.label});
            }
            const auto rows = build_dataset(windows, config);
            write_file(dataset_path, dataset_to_csv(rows));
            out << "wrote " << rows.size() << " rows\n";
            return kExitOk;
        }
        if (validate_cmd->parsed()) {
            const auto stream = load_stream(left, right, Config{});
            out << "ok " << stream.frames.size() << " frames, nominal_fps=" << opt(stream.nominal_fps, 2) << "\n";
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitUsage;
}

}  // namespace hge::cli

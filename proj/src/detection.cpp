#include "spectrafuse/detection.hpp"

#include "spectrafuse/error.hpp"
#include "spectrafuse/metrics.hpp"
#include "textio.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace spectrafuse {

namespace {

constexpr double kCoordinateBound = 1e6;

void validate_confidence(double confidence) {
    if (!std::isfinite(confidence) || confidence < 0.0 || confidence > 1.0) {
        throw ValidationError("confidence " + textio::format_double(confidence) +
                              " outside [0, 1]");
    }
}

void validate_frame_index(std::int64_t frame_index) {
    if (frame_index < 0) {
        throw ValidationError("frame index " + std::to_string(frame_index) +
                              " is negative");
    }
}

BoundingBox parse_box(const std::vector<std::string_view>& fields, std::size_t offset,
                      const std::filesystem::path& path, std::size_t line) {
    BoundingBox box;
    box.x_min = textio::parse_double(fields[offset + 0], path, line, "x_min");
    box.y_min = textio::parse_double(fields[offset + 1], path, line, "y_min");
    box.x_max = textio::parse_double(fields[offset + 2], path, line, "x_max");
    box.y_max = textio::parse_double(fields[offset + 3], path, line, "y_max");
    return box;
}

std::string box_to_string(const BoundingBox& box) {
    return textio::format_double(box.x_min) + " " + textio::format_double(box.y_min) +
           " " + textio::format_double(box.x_max) + " " +
           textio::format_double(box.y_max);
}

BoundingBox map_single_box(const Homography& h, const BoundingBox& box) {
    Point corners[4] = {{box.x_min, box.y_min},
                        {box.x_max, box.y_min},
                        {box.x_max, box.y_max},
                        {box.x_min, box.y_max}};
    BoundingBox out;
    for (int i = 0; i < 4; ++i) {
        Point p = h.apply(corners[i]);
        if (i == 0) {
            out = {p.x, p.y, p.x, p.y};
        } else {
            out.x_min = std::min(out.x_min, p.x);
            out.y_min = std::min(out.y_min, p.y);
            out.x_max = std::max(out.x_max, p.x);
            out.y_max = std::max(out.y_max, p.y);
        }
    }
    return out;
}

/// Clamps to [0, w] x [0, h]; returns false when the result has no area.
bool clamp_box(BoundingBox& box, double clamp_w, double clamp_h) {
    box.x_min = std::clamp(box.x_min, 0.0, clamp_w);
    box.x_max = std::clamp(box.x_max, 0.0, clamp_w);
    box.y_min = std::clamp(box.y_min, 0.0, clamp_h);
    box.y_max = std::clamp(box.y_max, 0.0, clamp_h);
    return box.x_min < box.x_max && box.y_min < box.y_max;
}

}  // namespace

void BoundingBox::validate() const {
    for (double v : {x_min, y_min, x_max, y_max}) {
        if (!std::isfinite(v) || v < -kCoordinateBound || v > kCoordinateBound) {
            throw ValidationError("box coordinate " + textio::format_double(v) +
                                  " outside the +/-1e6 sanity bound");
        }
    }
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw ValidationError("inverted box (" + box_to_string(*this) + ")");
    }
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    std::vector<Detection> detections;
    detections.reserve(lines.size());
    for (const auto& line : lines) {
        auto fields = textio::split_fields(line.text);
        if (fields.size() != 7) {
            textio::fail_line(
                path, line.number,
                "expected 'frame_index x_min y_min x_max y_max confidence class_id', "
                "got " + std::to_string(fields.size()) + " fields");
        }
        Detection det;
        det.frame_index = textio::parse_int(fields[0], path, line.number, "frame index");
        det.box = parse_box(fields, 1, path, line.number);
        det.confidence = textio::parse_double(fields[5], path, line.number, "confidence");
        det.class_id = static_cast<int>(
            textio::parse_int(fields[6], path, line.number, "class id"));
        try {
            validate_frame_index(det.frame_index);
            det.box.validate();
            validate_confidence(det.confidence);
        } catch (const ValidationError& e) {
            textio::fail_line(path, line.number, e.what());
        }
        detections.push_back(det);
    }
    return detections;
}

void write_detections(const std::filesystem::path& path,
                      const std::vector<Detection>& detections) {
    std::ostringstream out;
    for (const Detection& det : detections) {
        validate_frame_index(det.frame_index);
        det.box.validate();
        validate_confidence(det.confidence);
        out << det.frame_index << " " << box_to_string(det.box) << " "
            << textio::format_double(det.confidence) << " " << det.class_id << "\n";
    }
    textio::write_file(path, out.str());
}

std::vector<GroundTruthLabel> read_labels(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    std::vector<GroundTruthLabel> labels;
    labels.reserve(lines.size());
    for (const auto& line : lines) {
        auto fields = textio::split_fields(line.text);
        if (fields.size() != 6) {
            textio::fail_line(path, line.number,
                              "expected 'frame_index x_min y_min x_max y_max class_id', "
                              "got " + std::to_string(fields.size()) + " fields");
        }
        GroundTruthLabel label;
        label.frame_index =
            textio::parse_int(fields[0], path, line.number, "frame index");
        label.box = parse_box(fields, 1, path, line.number);
        label.class_id = static_cast<int>(
            textio::parse_int(fields[5], path, line.number, "class id"));
        try {
            validate_frame_index(label.frame_index);
            label.box.validate();
        } catch (const ValidationError& e) {
            textio::fail_line(path, line.number, e.what());
        }
        labels.push_back(label);
    }
    return labels;
}

void write_labels(const std::filesystem::path& path,
                  const std::vector<GroundTruthLabel>& labels) {
    std::ostringstream out;
    for (const GroundTruthLabel& label : labels) {
        validate_frame_index(label.frame_index);
        label.box.validate();
        out << label.frame_index << " " << box_to_string(label.box) << " "
            << label.class_id << "\n";
    }
    textio::write_file(path, out.str());
}

std::vector<Detection> filter_by_confidence(const std::vector<Detection>& detections,
                                            double ct) {
    if (!std::isfinite(ct) || ct < 0.0 || ct > 1.0) {
        throw ValidationError("confidence threshold " + textio::format_double(ct) +
                              " outside [0, 1]");
    }
    std::vector<Detection> kept;
    kept.reserve(detections.size());
    for (const Detection& det : detections) {
        if (det.confidence >= ct) kept.push_back(det);
    }
    return kept;
}

std::vector<Detection> map_boxes(const Homography& h,
                                 const std::vector<Detection>& detections,
                                 double clamp_w, double clamp_h) {
    std::vector<Detection> out;
    out.reserve(detections.size());
    for (const Detection& det : detections) {
        Detection mapped = det;
        mapped.box = map_single_box(h, det.box);
        if (clamp_box(mapped.box, clamp_w, clamp_h)) out.push_back(mapped);
    }
    return out;
}

std::vector<GroundTruthLabel> map_boxes(const Homography& h,
                                        const std::vector<GroundTruthLabel>& labels,
                                        double clamp_w, double clamp_h) {
    std::vector<GroundTruthLabel> out;
    out.reserve(labels.size());
    for (const GroundTruthLabel& label : labels) {
        GroundTruthLabel mapped = label;
        mapped.box = map_single_box(h, label.box);
        if (clamp_box(mapped.box, clamp_w, clamp_h)) out.push_back(mapped);
    }
    return out;
}

std::vector<GroundTruthLabel> merge_labels(
    const std::vector<GroundTruthLabel>& primary,
    const std::vector<GroundTruthLabel>& secondary_mapped, double dedup_iou) {
    if (!std::isfinite(dedup_iou) || dedup_iou < 0.0 || dedup_iou > 1.0) {
        throw ValidationError("dedup IoU " + textio::format_double(dedup_iou) +
                              " outside [0, 1]");
    }
    std::vector<GroundTruthLabel> merged = primary;
    for (const GroundTruthLabel& candidate : secondary_mapped) {
        bool duplicate = false;
        for (const GroundTruthLabel& kept : primary) {
            if (kept.frame_index == candidate.frame_index &&
                kept.class_id == candidate.class_id &&
                iou(kept.box, candidate.box) >= dedup_iou) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) merged.push_back(candidate);
    }
    return merged;
}

namespace {

template <typename Item>
std::vector<Item> reindex_impl(const std::vector<Item>& items,
                               const std::vector<FramePair>& pairs,
                               PairMember member) {
    std::unordered_multimap<std::int64_t, std::int64_t> source_to_ordinal;
    for (std::size_t ordinal = 0; ordinal < pairs.size(); ++ordinal) {
        std::int64_t source = member == PairMember::Lwir ? pairs[ordinal].lwir_index
                                                         : pairs[ordinal].rgb_index;
        source_to_ordinal.emplace(source, static_cast<std::int64_t>(ordinal));
    }
    std::vector<Item> out;
    for (const Item& item : items) {
        auto [begin, end] = source_to_ordinal.equal_range(item.frame_index);
        for (auto it = begin; it != end; ++it) {
            Item copy = item;
            copy.frame_index = it->second;
            out.push_back(copy);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Item& a, const Item& b) {
        return a.frame_index < b.frame_index;
    });
    return out;
}

}  // namespace

std::vector<Detection> reindex_to_pairs(const std::vector<Detection>& detections,
                                        const std::vector<FramePair>& pairs,
                                        PairMember member) {
    return reindex_impl(detections, pairs, member);
}

std::vector<GroundTruthLabel> reindex_to_pairs(
    const std::vector<GroundTruthLabel>& labels, const std::vector<FramePair>& pairs,
    PairMember member) {
    return reindex_impl(labels, pairs, member);
}

namespace {

std::string substitute_placeholder(const std::string& token, const std::string& key,
                                   const std::string& value, int& count) {
    std::string out = token;
    std::size_t pos = 0;
    while ((pos = out.find(key, pos)) != std::string::npos) {
        out.replace(pos, key.size(), value);
        pos += value.size();
        ++count;
    }
    return out;
}

struct ChildResult {
    int exit_status = -1;
    int term_signal = 0;
    bool timed_out = false;
    std::string stderr_text;
};

ChildResult run_child(const std::vector<std::string>& argv, double timeout_s) {
    int err_pipe[2];
    if (pipe(err_pipe) != 0) {
        throw DetectorError("cannot create stderr pipe for detector");
    }

    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const std::string& arg : argv) {
        cargv.push_back(const_cast<char*>(arg.c_str()));
    }
    cargv.push_back(nullptr);

    pid_t pid = fork();
    if (pid < 0) {
        close(err_pipe[0]);
        close(err_pipe[1]);
        throw DetectorError("cannot fork detector process");
    }
    if (pid == 0) {
        close(err_pipe[0]);
        dup2(err_pipe[1], STDERR_FILENO);
        close(err_pipe[1]);
        execvp(cargv[0], cargv.data());
        const char* msg = "exec failed: ";
        (void)!write(STDERR_FILENO, msg, 13);
        (void)!write(STDERR_FILENO, cargv[0], std::string(cargv[0]).size());
        (void)!write(STDERR_FILENO, "\n", 1);
        _exit(127);
    }

    close(err_pipe[1]);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    ChildResult result;
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration<double>(timeout_s);
    bool exited = false;
    int status = 0;
    char buf[4096];
    while (true) {
        pollfd pfd{err_pipe[0], POLLIN, 0};
        poll(&pfd, 1, 20);
        ssize_t n;
        while ((n = read(err_pipe[0], buf, sizeof(buf))) > 0) {
            result.stderr_text.append(buf, static_cast<std::size_t>(n));
        }
        pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            exited = true;
            break;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
    }
    ssize_t n;
    while ((n = read(err_pipe[0], buf, sizeof(buf))) > 0) {
        result.stderr_text.append(buf, static_cast<std::size_t>(n));
    }
    close(err_pipe[0]);

    if (exited) {
        if (WIFEXITED(status)) {
            result.exit_status = WEXITSTATUS(status);
        } else if (WIFSIGNALED(status)) {
            result.term_signal = WTERMSIG(status);
        }
    }
    return result;
}

std::string stderr_excerpt(const std::string& text) {
    if (text.empty()) return "(no stderr output)";
    constexpr std::size_t kLimit = 2000;
    if (text.size() <= kLimit) return text;
    return "..." + text.substr(text.size() - kLimit);
}

}  // namespace

std::vector<Detection> run_external_detector(const DetectorCommand& command,
                                             const std::filesystem::path& manifest_path,
                                             const std::filesystem::path& out_path) {
    if (command.argv_template.empty()) {
        throw ValidationError("detector command is empty");
    }
    if (!(command.timeout_s > 0.0)) {
        throw ValidationError("detector timeout must be positive");
    }
    int manifest_count = 0;
    int out_count = 0;
    std::vector<std::string> argv;
    argv.reserve(command.argv_template.size());
    for (const std::string& token : command.argv_template) {
        std::string sub =
            substitute_placeholder(token, "{manifest}", manifest_path.string(),
                                   manifest_count);
        sub = substitute_placeholder(sub, "{out}", out_path.string(), out_count);
        argv.push_back(std::move(sub));
    }
    if (manifest_count != 1 || out_count != 1) {
        throw ValidationError(
            "detector command must contain {manifest} and {out} exactly once");
    }
    if (!std::filesystem::exists(manifest_path)) {
        throw IoError("cannot open " + manifest_path.string());
    }

    ChildResult child = run_child(argv, command.timeout_s);
    if (!child.stderr_text.empty()) {
        // Relay the tool's diagnostics so they are not swallowed.
        fprintf(stderr, "%s", child.stderr_text.c_str());
    }
    if (child.timed_out) {
        throw DetectorError("detector timed out after " +
                            textio::format_double(command.timeout_s) + " s");
    }
    if (child.term_signal != 0) {
        throw DetectorError("detector killed by signal " +
                                std::to_string(child.term_signal) + "; stderr: " +
                                stderr_excerpt(child.stderr_text),
                            -child.term_signal);
    }
    if (child.exit_status != 0) {
        throw DetectorError("detector exited with status " +
                                std::to_string(child.exit_status) + "; stderr: " +
                                stderr_excerpt(child.stderr_text),
                            child.exit_status);
    }
    if (!std::filesystem::exists(out_path)) {
        throw DetectorError("detector did not produce output file " +
                            out_path.string());
    }
    return read_detections(out_path);
}

}  // namespace spectrafuse

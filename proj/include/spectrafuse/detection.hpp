#pragma once

#include "spectrafuse/registration.hpp"
#include "spectrafuse/sync.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace spectrafuse {

struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    /// Throws ValidationError unless x_min < x_max, y_min < y_max, and all
    /// coordinates are finite and within the +/-1e6 sanity bound.
    void validate() const;
};

struct Detection {
    std::int64_t frame_index = 0;
    BoundingBox box;
    double confidence = 0.0;
    int class_id = 0;
};

struct GroundTruthLabel {
    std::int64_t frame_index = 0;
    BoundingBox box;
    int class_id = 0;
};

/// Reads/writes 'frame_index x_min y_min x_max y_max confidence class_id'
/// lines; '#' comments. Invariants are enforced on read and write.
std::vector<Detection> read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path,
                      const std::vector<Detection>& detections);

/// Reads/writes 'frame_index x_min y_min x_max y_max class_id' lines.
std::vector<GroundTruthLabel> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path,
                  const std::vector<GroundTruthLabel>& labels);

/// Keeps detections with confidence >= ct (inclusive), preserving order.
std::vector<Detection> filter_by_confidence(const std::vector<Detection>& detections,
                                            double ct);

/// Maps each box by transforming its four corners through `h` and taking
/// the axis-aligned bounding box of the images, clamped to
/// [0, clamp_w] x [0, clamp_h]. Boxes that clamp to zero area are dropped.
std::vector<Detection> map_boxes(const Homography& h,
                                 const std::vector<Detection>& detections,
                                 double clamp_w, double clamp_h);
std::vector<GroundTruthLabel> map_boxes(const Homography& h,
                                        const std::vector<GroundTruthLabel>& labels,
                                        double clamp_w, double clamp_h);

/// Union of two label lists in the same geometry: a secondary label whose
/// IoU with any same-frame, same-class primary label reaches dedup_iou is
/// discarded. Output order: primary list, then surviving secondary labels.
std::vector<GroundTruthLabel> merge_labels(
    const std::vector<GroundTruthLabel>& primary,
    const std::vector<GroundTruthLabel>& secondary_mapped,
    double dedup_iou = 0.5);

/// Which member of a FramePair a frame index refers to.
enum class PairMember { Lwir, Rgb };

/// Rewrites frame indices from one source stream onto pair ordinals
/// (0-based position in `pairs`), so per-spectrum files can be evaluated
/// against the fused stream. Items on frames no pair references are
/// dropped; a frame reused by several pairs is emitted once per pair.
std::vector<Detection> reindex_to_pairs(const std::vector<Detection>& detections,
                                        const std::vector<FramePair>& pairs,
                                        PairMember member);
std::vector<GroundTruthLabel> reindex_to_pairs(
    const std::vector<GroundTruthLabel>& labels,
    const std::vector<FramePair>& pairs, PairMember member);

/// External detector invocation: argv with {manifest} and {out}
/// placeholders, each present exactly once across the tokens.
struct DetectorCommand {
    std::vector<std::string> argv_template;
    double timeout_s = 600.0;
};

/// Substitutes the placeholders, runs the process with the timeout, and
/// parses the output file. Process failures (nonzero exit, signal,
/// timeout, missing output) raise DetectorError carrying captured stderr;
/// a malformed output file raises ParseError.
std::vector<Detection> run_external_detector(const DetectorCommand& command,
                                             const std::filesystem::path& manifest_path,
                                             const std::filesystem::path& out_path);

}  // namespace spectrafuse

#pragma once

#include "spectrafuse/detection.hpp"
#include "spectrafuse/image.hpp"
#include "spectrafuse/registration.hpp"
#include "spectrafuse/report.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace spectrafuse {

enum class BackgroundKind { SkyGradient, Treeline, SunriseGlare };

std::string to_string(BackgroundKind kind);
BackgroundKind background_from_string(const std::string& text);

enum class EntityKind { Drone, Lamp, Bird };

std::string to_string(EntityKind kind);
EntityKind entity_kind_from_string(const std::string& text);

struct Waypoint {
    double t_s = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// A moving disc in RGB-scene coordinates. Only drones receive ground
/// truth labels; lamps and birds render as unlabeled distractors.
struct Entity {
    EntityKind kind = EntityKind::Drone;
    double radius_px = 8.0;
    std::uint8_t lwir_intensity = 255;
    std::array<std::uint8_t, 3> rgb_color{110, 110, 110};
    std::vector<Waypoint> trajectory;
};

struct SceneSpec {
    std::string scenario_id;
    DroneCount condition = DroneCount::Single;
    double duration_s = 10.0;
    std::uint64_t seed = 0;
    double lwir_rate_hz = 60.0;
    double rgb_rate_hz = 35.0;
    int lwir_width = 640;
    int lwir_height = 512;
    int rgb_width = 612;
    int rgb_height = 512;
    BackgroundKind background = BackgroundKind::SkyGradient;
    /// Sky/band boundary as a fraction of image height.
    double horizon_frac = 0.55;
    /// Glare source, used by the sunrise_glare background.
    Point sun_center{306.0, 140.0};
    double sun_radius = 110.0;
    /// Maps LWIR pixel coordinates to RGB pixel coordinates.
    Homography true_homography;
    std::vector<Entity> entities;

    /// Throws ValidationError for nonsensical fields, an entity without
    /// waypoints, or an entity that never enters either camera's view.
    void validate() const;
};

SceneSpec read_scene_spec(const std::filesystem::path& path);
void write_scene_spec(const std::filesystem::path& path, const SceneSpec& spec);

/// The four documented scenarios: treeline, sunrise, lamps, longrange.
std::vector<SceneSpec> builtin_specs();

/// Throws ValidationError listing valid names for an unknown id.
SceneSpec builtin_spec(const std::string& scenario_id);

struct RenderedScenario {
    std::string scenario_id;
    DroneCount condition = DroneCount::Single;
    Homography true_homography;
    StreamManifest lwir_manifest;
    StreamManifest rgb_manifest;
    std::vector<GroundTruthLabel> lwir_labels;
    std::vector<GroundTruthLabel> rgb_labels;
};

/// Renders both streams into out_dir: lwir/frame_*.pgm, rgb/frame_*.ppm,
/// lwir.manifest, rgb.manifest, lwir_labels.txt, rgb_labels.txt. Frame
/// counts are floor(duration * rate) + 1 per stream. Identical spec and
/// seed produce byte-identical files.
RenderedScenario generate_scenario(const SceneSpec& spec,
                                   const std::filesystem::path& out_dir);

enum class OracleMode { HotBlob, DarkBlob, FusedBlob };

std::string to_string(OracleMode mode);
OracleMode oracle_mode_from_string(const std::string& text);

/// Contrast-blob reference detector. hot_blob: channel mean >= 180;
/// dark_blob: channel mean at least 25 below a 15x15 box-blur background;
/// fused_blob: either rule, excluding lamp-yellow pixels (red and green
/// both exceeding blue by >= 60). 4-connected components of at least 4
/// pixels become detections; box = component bounds; confidence =
/// min(1, peak |channel mean - frame mean| / 100).
std::vector<Detection> oracle_detect_frame(const PixelBuffer& frame,
                                           std::int64_t frame_index, OracleMode mode);

/// Runs the oracle over every manifest entry.
std::vector<Detection> oracle_detect_stream(const std::filesystem::path& manifest_path,
                                            OracleMode mode);

}  // namespace spectrafuse

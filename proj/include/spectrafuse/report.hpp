#pragma once

#include "spectrafuse/metrics.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace spectrafuse {

enum class DroneCount { Single, Multiple };

std::string to_string(DroneCount condition);
DroneCount drone_count_from_string(const std::string& text);

/// One line of an evaluation config: either a detections/labels file pair
/// or a replay entry ('replay:<path>' with labels '-') that injects
/// published per-ct means directly.
struct EvalScenario {
    std::string scenario_id;
    DroneCount condition = DroneCount::Single;
    bool replay = false;
    std::filesystem::path detections_path;
    std::filesystem::path labels_path;
};

/// Reads 'scenario_id condition detections_path labels_path' lines;
/// condition is Single or Multiple. Relative paths are resolved against
/// the config file's directory.
std::vector<EvalScenario> read_eval_config(const std::filesystem::path& path);

/// Replay file row: 'ct_pct dr far'.
struct ReplayRow {
    double ct_pct = 0.0;
    double dr = 0.0;
    double far = 0.0;
};

std::vector<ReplayRow> read_replay(const std::filesystem::path& path);

/// Aggregated rows of one evaluated method, keyed by (condition, ct).
struct MethodReport {
    std::string name;
    std::map<std::pair<Condition, double>, MetricRow> dr;
    std::map<std::pair<Condition, double>, MetricRow> far;
};

/// Evaluates every scenario of a config at the given thresholds
/// (fractions in [0,1]) and aggregates Combined/SingleDrone/MultipleDrones
/// rows per threshold.
MethodReport evaluate_config(const std::string& name,
                             const std::filesystem::path& config_path,
                             const std::vector<double>& ct_list,
                             double iou_threshold = 0.5);

struct EvalReport {
    std::vector<double> ct_list;
    MethodReport ours;
    std::vector<MethodReport> baselines;
};

enum class ReportFormat { Text, Csv };

/// Renders the DR and FAR tables with one block per baseline (variation
/// column included; 'n/a' where the baseline mean is zero). Every method
/// must cover the same (condition, ct) cells; a missing cell is an error.
std::string render_report(const EvalReport& report, ReportFormat format);

}  // namespace spectrafuse

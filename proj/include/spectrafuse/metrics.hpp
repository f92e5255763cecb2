#pragma once

#include "spectrafuse/detection.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spectrafuse {

/// Intersection over union of two valid boxes; 0 when disjoint.
double iou(const BoundingBox& a, const BoundingBox& b);

struct MatchedPair {
    std::size_t detection_index = 0;
    std::size_t label_index = 0;
    double iou = 0.0;
};

struct MatchResult {
    std::int64_t frame_index = 0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::vector<MatchedPair> matched_pairs;
};

/// Greedy one-to-one matching on a single frame: detections sorted by
/// confidence descending (ties keep the lower index first) each claim the
/// unclaimed same-class label with the highest IoU at or above the
/// threshold (ties go to the lower label index). Claimed detections are
/// true positives, the rest false positives; unclaimed labels are false
/// negatives. Throws ValidationError when inputs mix frame indices.
MatchResult match_frame(const std::vector<Detection>& detections,
                        const std::vector<GroundTruthLabel>& labels,
                        double iou_threshold = 0.5);

/// tp / (tp + fn). Throws EvalError when tp + fn = 0 (no ground truth).
double detection_rate(std::int64_t tp, std::int64_t fn);

/// fp / (tp + fp); 0 when tp + fp = 0 (a silent detector raises no alarms).
double false_alarm_rate(std::int64_t fp, std::int64_t tp);

struct ScenarioMetrics {
    std::string scenario_id;
    double ct = 0.0;
    double dr = 0.0;
    double far = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

inline const std::vector<double>& default_ct_list() {
    static const std::vector<double> cts = {0.25, 0.50, 0.75, 0.90};
    return cts;
}

/// For each confidence threshold: filter detections, match every frame,
/// sum tp/fp/fn over frames (micro-averaging), and compute DR and FAR from
/// the sums. Throws EvalError when the scenario has no ground truth.
std::vector<ScenarioMetrics> evaluate_scenario(
    const std::string& scenario_id, const std::vector<Detection>& detections,
    const std::vector<GroundTruthLabel>& labels,
    const std::vector<double>& ct_list = default_ct_list(),
    double iou_threshold = 0.5);

enum class Condition { Combined, SingleDrone, MultipleDrones };

std::string to_string(Condition condition);

struct MetricRow {
    Condition condition = Condition::Combined;
    double ct = 0.0;
    double mean = 0.0;
    /// Population standard deviation across scenarios.
    double sd = 0.0;
    std::size_t n_scenarios = 0;
};

/// Mean and population SD of per-scenario values for one (condition, ct)
/// group. Throws ValidationError on an empty group.
MetricRow aggregate_condition(Condition condition, double ct,
                              const std::vector<double>& values);

/// (ours - baseline) / baseline * 100. Throws EvalError when the baseline
/// mean is not positive ("variation undefined").
double variation(double ours_mean, double baseline_mean);

}  // namespace spectrafuse

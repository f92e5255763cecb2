#include "spectrafuse/metrics.hpp"

#include "spectrafuse/error.hpp"
#include "textio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace spectrafuse {

double iou(const BoundingBox& a, const BoundingBox& b) {
    double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    double intersection = ix * iy;
    double uni = a.area() + b.area() - intersection;
    return intersection / uni;
}

MatchResult match_frame(const std::vector<Detection>& detections,
                        const std::vector<GroundTruthLabel>& labels,
                        double iou_threshold) {
    if (!std::isfinite(iou_threshold) || iou_threshold <= 0.0 || iou_threshold > 1.0) {
        throw ValidationError("IoU threshold " + textio::format_double(iou_threshold) +
                              " outside (0, 1]");
    }
    MatchResult result;
    bool have_index = false;
    auto check_index = [&](std::int64_t index) {
        if (!have_index) {
            result.frame_index = index;
            have_index = true;
        } else if (index != result.frame_index) {
            throw ValidationError("match_frame inputs mix frame indices " +
                                  std::to_string(result.frame_index) + " and " +
                                  std::to_string(index));
        }
    };
    for (const Detection& det : detections) check_index(det.frame_index);
    for (const GroundTruthLabel& label : labels) check_index(label.frame_index);

    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].confidence > detections[b].confidence;
    });

    std::vector<bool> claimed(labels.size(), false);
    for (std::size_t det_index : order) {
        const Detection& det = detections[det_index];
        std::size_t best_label = labels.size();
        double best_iou = 0.0;
        for (std::size_t li = 0; li < labels.size(); ++li) {
            if (claimed[li] || labels[li].class_id != det.class_id) continue;
            double overlap = iou(det.box, labels[li].box);
            if (overlap < iou_threshold) continue;
            if (best_label == labels.size() || overlap > best_iou) {
                best_label = li;
                best_iou = overlap;
            }
        }
        if (best_label < labels.size()) {
            claimed[best_label] = true;
            result.matched_pairs.push_back({det_index, best_label, best_iou});
        }
    }

    result.tp = static_cast<std::int64_t>(result.matched_pairs.size());
    result.fp = static_cast<std::int64_t>(detections.size()) - result.tp;
    result.fn = static_cast<std::int64_t>(labels.size()) - result.tp;

    // Conservation identities; a violation would be an implementation bug.
    if (result.tp + result.fn != static_cast<std::int64_t>(labels.size()) ||
        result.tp + result.fp != static_cast<std::int64_t>(detections.size())) {
        throw ValidationError("matching violated count conservation");
    }
    return result;
}

double detection_rate(std::int64_t tp, std::int64_t fn) {
    if (tp < 0 || fn < 0) {
        throw ValidationError("negative counts in detection rate");
    }
    if (tp + fn == 0) {
        throw EvalError("detection rate undefined: no ground truth");
    }
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double false_alarm_rate(std::int64_t fp, std::int64_t tp) {
    if (tp < 0 || fp < 0) {
        throw ValidationError("negative counts in false alarm rate");
    }
    if (tp + fp == 0) return 0.0;
    return static_cast<double>(fp) / static_cast<double>(tp + fp);
}

std::vector<ScenarioMetrics> evaluate_scenario(
    const std::string& scenario_id, const std::vector<Detection>& detections,
    const std::vector<GroundTruthLabel>& labels, const std::vector<double>& ct_list,
    double iou_threshold) {
    if (ct_list.empty()) {
        throw ValidationError("confidence threshold list is empty");
    }

    std::map<std::int64_t, std::pair<std::vector<Detection>,
                                     std::vector<GroundTruthLabel>>> frames;
    for (const Detection& det : detections) {
        frames[det.frame_index].first.push_back(det);
    }
    for (const GroundTruthLabel& label : labels) {
        frames[label.frame_index].second.push_back(label);
    }

    std::vector<ScenarioMetrics> results;
    results.reserve(ct_list.size());
    for (double ct : ct_list) {
        ScenarioMetrics metrics;
        metrics.scenario_id = scenario_id;
        metrics.ct = ct;
        for (const auto& [frame_index, frame] : frames) {
            MatchResult match = match_frame(filter_by_confidence(frame.first, ct),
                                            frame.second, iou_threshold);
            metrics.tp += match.tp;
            metrics.fp += match.fp;
            metrics.fn += match.fn;
        }
        if (metrics.tp + metrics.fn == 0) {
            throw EvalError("detection rate undefined for scenario '" + scenario_id +
                            "': no ground truth labels");
        }
        metrics.dr = detection_rate(metrics.tp, metrics.fn);
        metrics.far = false_alarm_rate(metrics.fp, metrics.tp);
        results.push_back(std::move(metrics));
    }
    return results;
}

std::string to_string(Condition condition) {
    switch (condition) {
        case Condition::Combined: return "Combined";
        case Condition::SingleDrone: return "SingleDrone";
        case Condition::MultipleDrones: return "MultipleDrones";
    }
    throw ValidationError("unknown condition value");
}

MetricRow aggregate_condition(Condition condition, double ct,
                              const std::vector<double>& values) {
    if (values.empty()) {
        throw ValidationError("cannot aggregate an empty scenario group");
    }
    double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                  static_cast<double>(values.size());
    double variance = 0.0;
    for (double v : values) {
        variance += (v - mean) * (v - mean);
    }
    variance /= static_cast<double>(values.size());

    MetricRow row;
    row.condition = condition;
    row.ct = ct;
    row.mean = mean;
    row.sd = std::sqrt(variance);
    row.n_scenarios = values.size();
    return row;
}

double variation(double ours_mean, double baseline_mean) {
    if (!std::isfinite(ours_mean) || !std::isfinite(baseline_mean)) {
        throw ValidationError("variation inputs must be finite");
    }
    if (baseline_mean <= 0.0) {
        throw EvalError("variation undefined: baseline mean " +
                        textio::format_double(baseline_mean) + " is not positive");
    }
    return (ours_mean - baseline_mean) / baseline_mean * 100.0;
}

}  // namespace spectrafuse

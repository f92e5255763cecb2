#include "spectrafuse/report.hpp"

#include "spectrafuse/detection.hpp"
#include "spectrafuse/error.hpp"
#include "textio.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace spectrafuse {

namespace {

/// Percent formatting for CT columns: trims the float noise of ct*100.
std::string format_pct(double ct) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), ct * 100.0,
                                   std::chars_format::general, 6);
    (void)ec;
    return std::string(buf, ptr);
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::string format_cell(const MetricRow& row) {
    return textio::format_fixed(row.mean, 3) + " +/- " +
           textio::format_fixed(row.sd, 3);
}

std::string format_variation_text(const MetricRow& ours, const MetricRow& baseline) {
    if (baseline.mean <= 0.0) return "n/a";
    double v = variation(ours.mean, baseline.mean);
    std::string text = textio::format_fixed(std::abs(v), 1);
    return (v < 0.0 ? "-" : "+") + text + "%";
}

const MetricRow& require_cell(
    const std::map<std::pair<Condition, double>, MetricRow>& rows,
    const std::pair<Condition, double>& key, const std::string& method,
    const std::string& metric) {
    auto it = rows.find(key);
    if (it == rows.end()) {
        throw ValidationError("report is missing the " + metric + " cell " +
                              to_string(key.first) + "/" + format_pct(key.second) +
                              " for method '" + method + "'");
    }
    return it->second;
}

std::vector<std::pair<Condition, double>> cell_keys(const MethodReport& method) {
    std::vector<std::pair<Condition, double>> keys;
    for (const auto& [key, row] : method.dr) keys.push_back(key);
    return keys;
}

}  // namespace

std::string to_string(DroneCount condition) {
    return condition == DroneCount::Single ? "Single" : "Multiple";
}

DroneCount drone_count_from_string(const std::string& text) {
    if (text == "Single") return DroneCount::Single;
    if (text == "Multiple") return DroneCount::Multiple;
    throw ValidationError("unknown condition '" + text +
                          "' (expected Single or Multiple)");
}

std::vector<EvalScenario> read_eval_config(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    std::filesystem::path base = path.parent_path();
    std::vector<EvalScenario> scenarios;
    std::set<std::string> seen_ids;
    for (const auto& line : lines) {
        auto fields = textio::split_fields(line.text);
        if (fields.size() != 4) {
            textio::fail_line(
                path, line.number,
                "expected 'scenario_id condition detections_path labels_path', got " +
                    std::to_string(fields.size()) + " fields");
        }
        EvalScenario scenario;
        scenario.scenario_id = std::string(fields[0]);
        if (!seen_ids.insert(scenario.scenario_id).second) {
            textio::fail_line(path, line.number,
                              "duplicate scenario id '" + scenario.scenario_id + "'");
        }
        try {
            scenario.condition = drone_count_from_string(std::string(fields[1]));
        } catch (const ValidationError& e) {
            textio::fail_line(path, line.number, e.what());
        }
        std::string det_token(fields[2]);
        std::string labels_token(fields[3]);
        constexpr std::string_view kReplayPrefix = "replay:";
        if (det_token.starts_with(kReplayPrefix)) {
            scenario.replay = true;
            scenario.detections_path =
                base / det_token.substr(kReplayPrefix.size());
            if (labels_token != "-") {
                textio::fail_line(path, line.number,
                                  "replay entries take '-' as labels_path");
            }
        } else {
            if (labels_token == "-") {
                textio::fail_line(path, line.number,
                                  "labels_path '-' is only valid for replay entries");
            }
            scenario.detections_path = base / det_token;
            scenario.labels_path = base / labels_token;
        }
        scenarios.push_back(std::move(scenario));
    }
    return scenarios;
}

std::vector<ReplayRow> read_replay(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    std::vector<ReplayRow> rows;
    for (const auto& line : lines) {
        auto fields = textio::split_fields(line.text);
        if (fields.size() != 3) {
            textio::fail_line(path, line.number,
                              "expected 'ct_pct dr far', got " +
                                  std::to_string(fields.size()) + " fields");
        }
        ReplayRow row;
        row.ct_pct = textio::parse_double(fields[0], path, line.number, "ct");
        row.dr = textio::parse_double(fields[1], path, line.number, "dr");
        row.far = textio::parse_double(fields[2], path, line.number, "far");
        if (row.ct_pct < 0.0 || row.ct_pct > 100.0) {
            textio::fail_line(path, line.number, "ct must be a percent in [0, 100]");
        }
        for (double v : {row.dr, row.far}) {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                textio::fail_line(path, line.number,
                                  "metric value " + textio::format_double(v) +
                                      " outside [0, 1]");
            }
        }
        rows.push_back(row);
    }
    return rows;
}

MethodReport evaluate_config(const std::string& name,
                             const std::filesystem::path& config_path,
                             const std::vector<double>& ct_list,
                             double iou_threshold) {
    if (ct_list.empty()) {
        throw ValidationError("confidence threshold list is empty");
    }
    std::vector<EvalScenario> scenarios = read_eval_config(config_path);
    if (scenarios.empty()) {
        throw ValidationError(config_path.string() + ": config lists no scenarios");
    }

    // scenario results per ct, in config order, with their condition
    std::vector<std::pair<DroneCount, std::vector<ScenarioMetrics>>> evaluated;
    for (const EvalScenario& scenario : scenarios) {
        std::vector<ScenarioMetrics> metrics;
        if (scenario.replay) {
            std::vector<ReplayRow> rows = read_replay(scenario.detections_path);
            for (double ct : ct_list) {
                const ReplayRow* found = nullptr;
                for (const ReplayRow& row : rows) {
                    if (std::abs(row.ct_pct - ct * 100.0) < 1e-6) {
                        found = &row;
                        break;
                    }
                }
                if (found == nullptr) {
                    throw EvalError(scenario.detections_path.string() +
                                    ": no replay row for confidence threshold " +
                                    format_pct(ct) + "%");
                }
                ScenarioMetrics m;
                m.scenario_id = scenario.scenario_id;
                m.ct = ct;
                m.dr = found->dr;
                m.far = found->far;
                metrics.push_back(std::move(m));
            }
        } else {
            std::vector<Detection> detections =
                read_detections(scenario.detections_path);
            std::vector<GroundTruthLabel> labels = read_labels(scenario.labels_path);
            try {
                metrics = evaluate_scenario(scenario.scenario_id, detections, labels,
                                            ct_list, iou_threshold);
            } catch (const EvalError& e) {
                throw EvalError(config_path.string() + ": " + e.what());
            }
        }
        evaluated.emplace_back(scenario.condition, std::move(metrics));
    }

    MethodReport report;
    report.name = name;
    for (std::size_t ci = 0; ci < ct_list.size(); ++ci) {
        double ct = ct_list[ci];
        for (Condition condition :
             {Condition::Combined, Condition::SingleDrone, Condition::MultipleDrones}) {
            std::vector<double> dr_values;
            std::vector<double> far_values;
            for (const auto& [drone_count, metrics] : evaluated) {
                bool in_group =
                    condition == Condition::Combined ||
                    (condition == Condition::SingleDrone &&
                     drone_count == DroneCount::Single) ||
                    (condition == Condition::MultipleDrones &&
                     drone_count == DroneCount::Multiple);
                if (!in_group) continue;
                dr_values.push_back(metrics[ci].dr);
                far_values.push_back(metrics[ci].far);
            }
            if (dr_values.empty()) continue;
            auto key = std::make_pair(condition, ct);
            report.dr[key] = aggregate_condition(condition, ct, dr_values);
            report.far[key] = aggregate_condition(condition, ct, far_values);
        }
    }
    return report;
}

namespace {

void render_text_metric(std::ostringstream& out, const std::string& title,
                        const EvalReport& report, bool use_dr) {
    out << title << "\n" << std::string(title.size(), '=') << "\n";
    auto keys = cell_keys(report.ours);
    const auto& ours_rows = use_dr ? report.ours.dr : report.ours.far;
    const std::string metric = use_dr ? "DR" : "FAR";

    auto write_table = [&](const MethodReport* baseline) {
        std::size_t ours_width = std::max<std::size_t>(report.ours.name.size(), 17);
        out << "\n" << pad_right("Condition", 15) << pad_left("CT%", 4) << "  "
            << pad_right(report.ours.name, ours_width);
        if (baseline != nullptr) {
            std::size_t base_width = std::max<std::size_t>(baseline->name.size(), 17);
            out << pad_right(baseline->name, base_width)
                << pad_left("Variation", 10);
        }
        out << "\n";
        for (const auto& key : keys) {
            const MetricRow& ours =
                require_cell(ours_rows, key, report.ours.name, metric);
            out << pad_right(to_string(key.first), 15)
                << pad_left(format_pct(key.second), 4) << "  "
                << pad_right(format_cell(ours), ours_width);
            if (baseline != nullptr) {
                const auto& base_rows = use_dr ? baseline->dr : baseline->far;
                const MetricRow& base =
                    require_cell(base_rows, key, baseline->name, metric);
                std::size_t base_width =
                    std::max<std::size_t>(baseline->name.size(), 17);
                out << pad_right(format_cell(base), base_width)
                    << pad_left(format_variation_text(ours, base), 10);
            }
            out << "\n";
        }
    };

    if (report.baselines.empty()) {
        write_table(nullptr);
    } else {
        for (const MethodReport& baseline : report.baselines) {
            write_table(&baseline);
        }
    }
}

void render_csv_metric(std::ostringstream& out, const std::string& metric,
                       const EvalReport& report, bool use_dr) {
    auto keys = cell_keys(report.ours);
    const auto& ours_rows = use_dr ? report.ours.dr : report.ours.far;

    auto write_rows = [&](const MethodReport* baseline) {
        for (const auto& key : keys) {
            const MetricRow& ours =
                require_cell(ours_rows, key, report.ours.name, metric);
            out << metric << "," << to_string(key.first) << ","
                << format_pct(key.second) << "," << textio::format_fixed(ours.mean, 6)
                << "," << textio::format_fixed(ours.sd, 6) << "," << ours.n_scenarios
                << ",";
            if (baseline != nullptr) {
                const auto& base_rows = use_dr ? baseline->dr : baseline->far;
                const MetricRow& base =
                    require_cell(base_rows, key, baseline->name, metric);
                out << baseline->name << "," << textio::format_fixed(base.mean, 6)
                    << "," << textio::format_fixed(base.sd, 6) << ","
                    << base.n_scenarios << ",";
                if (base.mean > 0.0) {
                    out << textio::format_fixed(variation(ours.mean, base.mean), 6);
                }
            } else {
                out << ",,,,";
            }
            out << "\n";
        }
    };

    if (report.baselines.empty()) {
        write_rows(nullptr);
    } else {
        for (const MethodReport& baseline : report.baselines) {
            write_rows(&baseline);
        }
    }
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
    if (report.ours.dr.empty()) {
        throw ValidationError("report has no evaluated cells");
    }
    std::ostringstream out;
    if (format == ReportFormat::Text) {
        render_text_metric(out, "Detection Rate", report, true);
        out << "\n";
        render_text_metric(out, "False Alarm Rate", report, false);
    } else {
        out << "metric,condition,ct_pct,ours_mean,ours_sd,ours_n,baseline,"
               "baseline_mean,baseline_sd,baseline_n,variation_pct\n";
        render_csv_metric(out, "dr", report, true);
        render_csv_metric(out, "far", report, false);
    }
    return out.str();
}

}  // namespace spectrafuse

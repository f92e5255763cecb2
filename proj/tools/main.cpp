#include "CLI11.hpp"

#include "spectrafuse/detection.hpp"
#include "spectrafuse/error.hpp"
#include "spectrafuse/fusion.hpp"
#include "spectrafuse/image.hpp"
#include "spectrafuse/metrics.hpp"
#include "spectrafuse/registration.hpp"
#include "spectrafuse/report.hpp"
#include "spectrafuse/sync.hpp"
#include "spectrafuse/synthgen.hpp"
#include "textio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

using namespace spectrafuse;

namespace {

void run_calibrate(const std::string& corr_path, const std::string& out_path) {
    auto correspondences = read_correspondences(corr_path);
    Homography h = estimate_homography(correspondences);
    double max_residual = 0.0;
    for (const auto& c : correspondences) {
        Point p = h.apply(c.src);
        max_residual =
            std::max(max_residual, std::hypot(p.x - c.dst.x, p.y - c.dst.y));
    }
    write_homography(out_path, h);
    std::fprintf(stderr, "calibrated from %zu correspondences, max residual %s px\n",
                 correspondences.size(), textio::format_double(max_residual).c_str());
}

void run_pair(const std::string& lwir_path, const std::string& rgb_path,
              const std::string& out_path, double rate, double tolerance_ms,
              bool require_pairs) {
    PairingPolicy policy;
    policy.target_rate_hz = rate;
    policy.tolerance_ns = std::llround(tolerance_ms * 1e6);
    auto pairs = pair_streams(read_manifest(lwir_path), read_manifest(rgb_path), policy);
    if (pairs.empty() && require_pairs)
        throw ValidationError("no frame pairs within tolerance");
    write_pairing(out_path, pairs);
    std::int64_t max_skew = 0;
    for (const auto& p : pairs) max_skew = std::max(max_skew, p.skew_ns);
    std::fprintf(stderr, "%zu pairs, max skew %lld ns\n", pairs.size(),
                 static_cast<long long>(max_skew));
}

void run_fuse(const std::string& pairs_path, const std::string& homography_path,
              const std::string& lwir_path, const std::string& rgb_path,
              const std::string& out_dir, double alpha, const std::string& lut_path) {
    auto pairs = read_pairing(pairs_path);
    Homography h = read_homography(homography_path);
    FusionPolicy policy;
    policy.alpha = alpha;
    std::optional<ColorLut> lut;
    if (!lut_path.empty()) lut = read_lut(lut_path);
    std::filesystem::path lwir_manifest(lwir_path);
    std::filesystem::path rgb_manifest(rgb_path);
    auto manifest =
        fuse_sequence(pairs, h, read_manifest(lwir_manifest), lwir_manifest.parent_path(),
                      read_manifest(rgb_manifest), rgb_manifest.parent_path(), out_dir,
                      policy, lut);
    std::fprintf(stderr, "fused %zu frames into %s\n", manifest.entries.size(),
                 out_dir.c_str());
}

void run_detect(const std::string& manifest_path, const std::string& out_path,
                const std::string& oracle, const std::string& exec_template,
                double timeout_s) {
    if (oracle.empty() == exec_template.empty())
        throw ValidationError("exactly one of --oracle or --exec is required");
    std::vector<Detection> detections;
    if (!oracle.empty()) {
        detections = oracle_detect_stream(manifest_path, oracle_mode_from_string(oracle));
        write_detections(out_path, detections);
    } else {
        DetectorCommand command;
        for (const auto& token : textio::split_fields(exec_template))
            command.argv_template.emplace_back(token);
        command.timeout_s = timeout_s;
        detections = run_external_detector(command, manifest_path, out_path);
    }
    std::fprintf(stderr, "%zu detections written to %s\n", detections.size(),
                 out_path.c_str());
}

void run_eval(const std::string& config_path, const std::string& out_prefix,
              const std::string& ct_csv, double iou,
              const std::vector<std::string>& baseline_args,
              const std::string& ours_name) {
    std::vector<double> ct_list;
    {
        std::string token;
        std::string csv = ct_csv + ",";
        for (char ch : csv) {
            if (ch != ',') {
                token += ch;
                continue;
            }
            if (token.empty())
                throw ValidationError("--ct expects comma-separated percentages");
            char* end = nullptr;
            double pct = std::strtod(token.c_str(), &end);
            if (end != token.c_str() + token.size() || !(pct > 0.0) || pct > 100.0)
                throw ValidationError("confidence threshold '" + token +
                                      "' is not a percentage in (0, 100]");
            ct_list.push_back(pct / 100.0);
            token.clear();
        }
    }
    EvalReport report;
    report.ct_list = ct_list;
    report.ours = evaluate_config(ours_name, config_path, ct_list, iou);
    for (const auto& arg : baseline_args) {
        auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
            throw ValidationError("--baseline expects NAME=CONFIG_PATH, got '" + arg +
                                  "'");
        std::string name = arg.substr(0, eq);
        for (const auto& existing : report.baselines) {
            if (existing.name == name)
                throw ValidationError("duplicate baseline name '" + name + "'");
        }
        report.baselines.push_back(
            evaluate_config(name, arg.substr(eq + 1), ct_list, iou));
    }
    textio::write_file(out_prefix + ".txt", render_report(report, ReportFormat::Text));
    textio::write_file(out_prefix + ".csv", render_report(report, ReportFormat::Csv));
    std::fprintf(stderr, "wrote %s.txt and %s.csv\n", out_prefix.c_str(),
                 out_prefix.c_str());
}

void run_synth(const std::string& out_dir, const std::string& scenario,
               std::optional<std::int64_t> seed) {
    std::vector<SceneSpec> specs;
    if (scenario == "all") {
        specs = builtin_specs();
    } else {
        specs.push_back(builtin_spec(scenario));
    }
    for (SceneSpec spec : specs) {
        if (seed) {
            if (*seed < 0) throw ValidationError("--seed must be non-negative");
            spec.seed = static_cast<std::uint64_t>(*seed);
        }
        std::filesystem::path dir = std::filesystem::path(out_dir) / spec.scenario_id;
        RenderedScenario rendered = generate_scenario(spec, dir);
        write_scene_spec(dir / "scene.spec", spec);
        write_homography(dir / "true_homography.txt", spec.true_homography);
        std::vector<Correspondence> grid;
        for (int gy = 0; gy < 4; ++gy) {
            for (int gx = 0; gx < 4; ++gx) {
                Point src{40.0 + gx * (spec.lwir_width - 80.0) / 3.0,
                          40.0 + gy * (spec.lwir_height - 80.0) / 3.0};
                grid.push_back({src, spec.true_homography.apply(src)});
            }
        }
        write_correspondences(dir / "correspondences.txt", grid);
        std::fprintf(stderr,
                     "%s: %zu lwir frames, %zu rgb frames, %zu lwir labels, "
                     "%zu rgb labels\n",
                     spec.scenario_id.c_str(), rendered.lwir_manifest.entries.size(),
                     rendered.rgb_manifest.entries.size(), rendered.lwir_labels.size(),
                     rendered.rgb_labels.size());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LWIR+RGB drone detection evaluation toolkit"};
    app.require_subcommand(1);

    auto* calibrate = app.add_subcommand(
        "calibrate", "Estimate a homography from point correspondences");
    std::string cal_corr, cal_out;
    calibrate->add_option("correspondences", cal_corr,
                          "File of 'src_x src_y dst_x dst_y' lines")
        ->required();
    calibrate->add_option("out_homography", cal_out, "Output homography file")
        ->required();
    calibrate->callback([&] { run_calibrate(cal_corr, cal_out); });

    auto* pair = app.add_subcommand(
        "pair", "Pair two frame streams onto a common tick grid");
    std::string pair_lwir, pair_rgb, pair_out;
    double pair_rate = 30.0;
    double pair_tol_ms = 16666667 / 1e6;
    bool pair_require = false;
    pair->add_option("lwir_manifest", pair_lwir, "LWIR stream manifest")->required();
    pair->add_option("rgb_manifest", pair_rgb, "RGB stream manifest")->required();
    pair->add_option("out_pairs", pair_out, "Output pairing file")->required();
    pair->add_option("--rate", pair_rate, "Target tick rate in Hz")
        ->capture_default_str();
    pair->add_option("--tolerance-ms", pair_tol_ms,
                     "Max |frame - tick| distance in milliseconds")
        ->capture_default_str();
    pair->add_flag("--require-pairs", pair_require, "Fail if no pairs are found");
    pair->callback(
        [&] { run_pair(pair_lwir, pair_rgb, pair_out, pair_rate, pair_tol_ms,
                       pair_require); });

    auto* fuse = app.add_subcommand(
        "fuse", "Warp LWIR frames into RGB geometry and blend each pair");
    std::string fuse_pairs, fuse_h, fuse_lwir, fuse_rgb, fuse_out, fuse_lut;
    double fuse_alpha = 0.5;
    fuse->add_option("pairing", fuse_pairs, "Pairing file from 'pair'")->required();
    fuse->add_option("homography", fuse_h, "LWIR-to-RGB homography file")->required();
    fuse->add_option("lwir_manifest", fuse_lwir, "LWIR stream manifest")->required();
    fuse->add_option("rgb_manifest", fuse_rgb, "RGB stream manifest")->required();
    fuse->add_option("out_dir", fuse_out, "Output directory for fused frames")
        ->required();
    fuse->add_option("--alpha", fuse_alpha, "LWIR weight in [0, 1]")
        ->capture_default_str();
    fuse->add_option("--lwir-lut", fuse_lut,
                     "Optional 256-entry palette file applied to LWIR values");
    fuse->callback([&] {
        run_fuse(fuse_pairs, fuse_h, fuse_lwir, fuse_rgb, fuse_out, fuse_alpha,
                 fuse_lut);
    });

    auto* detect = app.add_subcommand(
        "detect", "Run the reference oracle or an external detector");
    std::string det_manifest, det_out, det_oracle, det_exec;
    double det_timeout = 600.0;
    detect->add_option("manifest", det_manifest, "Stream manifest to detect on")
        ->required();
    detect->add_option("out_detections", det_out, "Output detections file")->required();
    detect->add_option("--oracle", det_oracle,
                       "Reference detector: hot_blob, dark_blob, or fused_blob");
    detect->add_option("--exec", det_exec,
                       "External detector command with {manifest} and {out} "
                       "placeholders");
    detect->add_option("--timeout", det_timeout, "External detector timeout in seconds")
        ->capture_default_str();
    detect->callback(
        [&] { run_detect(det_manifest, det_out, det_oracle, det_exec, det_timeout); });

    auto* eval = app.add_subcommand(
        "eval", "Evaluate detections against labels and render reports");
    std::string eval_config, eval_prefix, eval_ct = "25,50,75,90";
    std::string eval_ours = "ours";
    double eval_iou = 0.5;
    std::vector<std::string> eval_baselines;
    eval->add_option("config", eval_config,
                     "Config of 'scenario_id condition detections labels' lines")
        ->required();
    eval->add_option("out_prefix", eval_prefix,
                     "Writes <prefix>.txt and <prefix>.csv")
        ->required();
    eval->add_option("--ct", eval_ct, "Confidence thresholds as percentages")
        ->capture_default_str();
    eval->add_option("--iou", eval_iou, "IoU threshold for matching")
        ->capture_default_str();
    eval->add_option("--baseline", eval_baselines,
                     "Baseline config as NAME=PATH (repeatable)");
    eval->add_option("--ours-name", eval_ours, "Name of the evaluated method")
        ->capture_default_str();
    eval->callback([&] {
        run_eval(eval_config, eval_prefix, eval_ct, eval_iou, eval_baselines, eval_ours);
    });

    auto* synth = app.add_subcommand(
        "synth", "Generate synthetic scenarios with ground truth");
    std::string synth_out, synth_scenario = "all";
    std::int64_t synth_seed = 0;
    synth->add_option("out_dir", synth_out, "Output directory")->required();
    auto* scenario_opt =
        synth->add_option("--scenario", synth_scenario,
                          "Scenario name (treeline, sunrise, lamps, longrange) or all")
            ->capture_default_str();
    auto* seed_opt = synth->add_option("--seed", synth_seed,
                                       "Override the scenario's default seed");
    (void)scenario_opt;
    synth->callback([&] {
        std::optional<std::int64_t> seed;
        if (seed_opt->count() > 0) seed = synth_seed;
        run_synth(synth_out, synth_scenario, seed);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const EvalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const DetectorError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

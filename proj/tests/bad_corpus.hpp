#pragma once

#include "spectrafuse/detection.hpp"
#include "spectrafuse/image.hpp"
#include "spectrafuse/registration.hpp"
#include "spectrafuse/report.hpp"
#include "spectrafuse/sync.hpp"
#include "spectrafuse/synthgen.hpp"

#include <filesystem>
#include <functional>
#include <vector>

namespace spectrafuse::testing {

struct BadFile {
    const char* name;
    std::function<void(const std::filesystem::path&)> load;
    const char* expected;
};

/// Malformed-input corpus: file name, the reader that must reject it, and
/// a fragment its error message must contain.
inline const std::vector<BadFile>& bad_corpus() {
    static const std::vector<BadFile> files = {
        {"image_bad_magic.pgm", [](const auto& p) { read_image(p); },
         "unsupported magic 'P4'"},
        {"image_bad_maxval.pgm", [](const auto& p) { read_image(p); },
         "unsupported maxval 65535"},
        {"image_truncated.pgm", [](const auto& p) { read_image(p); },
         "truncated pixel payload"},
        {"image_zero_dim.pgm", [](const auto& p) { read_image(p); },
         "width 0 out of range"},
        {"manifest_bad_header.manifest", [](const auto& p) { read_manifest(p); },
         "expected header 'spectrum=<LWIR|RGB|FUSED> source=<id>'"},
        {"manifest_bad_spectrum.manifest", [](const auto& p) { read_manifest(p); },
         "unknown spectrum 'XRAY'"},
        {"manifest_dup_index.manifest", [](const auto& p) { read_manifest(p); },
         "does not increase"},
        {"manifest_escaping_path.manifest", [](const auto& p) { read_manifest(p); },
         "must not contain '..'"},
        {"manifest_two_fields.manifest", [](const auto& p) { read_manifest(p); },
         "got 2 fields"},
        {"homography_8_values.txt", [](const auto& p) { read_homography(p); },
         "expected 9 values, found 8"},
        {"homography_singular.txt", [](const auto& p) { read_homography(p); },
         "homography is singular"},
        {"correspondences_3_fields.txt",
         [](const auto& p) { read_correspondences(p); }, "got 3 fields"},
        {"pairing_negative_skew.txt", [](const auto& p) { read_pairing(p); },
         "skew must be non-negative"},
        {"detections_6_fields.txt", [](const auto& p) { read_detections(p); },
         "got 6 fields"},
        {"detections_inverted_box.txt", [](const auto& p) { read_detections(p); },
         "inverted box"},
        {"labels_bad_class.txt", [](const auto& p) { read_labels(p); },
         "invalid class id 'notanint'"},
        {"replay_ct_out_of_range.txt", [](const auto& p) { read_replay(p); },
         "percent in [0, 100]"},
        {"eval_config_bad_condition.cfg", [](const auto& p) { read_eval_config(p); },
         "expected Single or Multiple"},
        {"scene_unknown_key.spec", [](const auto& p) { read_scene_spec(p); },
         "unknown scene key 'foo'"},
        {"lut_short.txt", [](const auto& p) { read_lut(p); },
         "expected 256 palette lines, found 2"},
    };
    return files;
}

}  // namespace spectrafuse::testing

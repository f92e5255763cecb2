#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spectrafuse/detection.hpp"
#include "spectrafuse/error.hpp"
#include "spectrafuse/fusion.hpp"
#include "spectrafuse/image.hpp"
#include "spectrafuse/metrics.hpp"
#include "spectrafuse/registration.hpp"
#include "spectrafuse/report.hpp"
#include "spectrafuse/sync.hpp"
#include "spectrafuse/synthgen.hpp"

#include <array>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace spectrafuse;

namespace {

using NumpyImage = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

PixelBuffer buffer_from_numpy(const NumpyImage& array) {
    if (array.ndim() != 2 && array.ndim() != 3)
        throw ValidationError("image array must be 2-D (gray) or 3-D (H x W x C)");
    int height = static_cast<int>(array.shape(0));
    int width = static_cast<int>(array.shape(1));
    int channels = array.ndim() == 3 ? static_cast<int>(array.shape(2)) : 1;
    PixelBuffer buffer = PixelBuffer::create(width, height, channels);
    std::memcpy(buffer.samples.data(), array.data(), buffer.samples.size());
    return buffer;
}

py::array numpy_from_buffer(const PixelBuffer& buffer) {
    if (buffer.channels == 1) {
        py::array_t<std::uint8_t> out({buffer.height, buffer.width});
        std::memcpy(out.mutable_data(), buffer.samples.data(), buffer.samples.size());
        return out;
    }
    py::array_t<std::uint8_t> out({buffer.height, buffer.width, buffer.channels});
    std::memcpy(out.mutable_data(), buffer.samples.data(), buffer.samples.size());
    return out;
}

Homography homography_from_numpy(const py::array_t<double>& array) {
    if (array.ndim() != 2 || array.shape(0) != 3 || array.shape(1) != 3)
        throw ValidationError("homography matrix must be 3x3");
    Homography h;
    auto view = array.unchecked<2>();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) h.m[r][c] = view(r, c);
    return h;
}

py::array_t<double> numpy_from_homography(const Homography& h) {
    py::array_t<double> out({3, 3});
    auto view = out.mutable_unchecked<2>();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) view(r, c) = h.m[r][c];
    return out;
}

std::vector<Correspondence> correspondences_from_numpy(const py::array_t<double>& src,
                                                       const py::array_t<double>& dst) {
    if (src.ndim() != 2 || src.shape(1) != 2 || dst.ndim() != 2 || dst.shape(1) != 2)
        throw ValidationError("correspondence arrays must have shape N x 2");
    if (src.shape(0) != dst.shape(0))
        throw ValidationError("src and dst must list the same number of points");
    auto s = src.unchecked<2>();
    auto d = dst.unchecked<2>();
    std::vector<Correspondence> out;
    out.reserve(static_cast<std::size_t>(src.shape(0)));
    for (py::ssize_t i = 0; i < src.shape(0); ++i)
        out.push_back({{s(i, 0), s(i, 1)}, {d(i, 0), d(i, 1)}});
    return out;
}

BoundingBox box_from_tuple(const std::array<double, 4>& t) {
    return {t[0], t[1], t[2], t[3]};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core routines of the LWIR+RGB drone detection evaluation toolkit";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<DetectorError>(m, "DetectorError", PyExc_RuntimeError);
    py::register_exception<EvalError>(m, "EvalError", PyExc_ValueError);

    py::class_<Homography>(m, "Homography")
        .def(py::init([]() { return Homography::identity(); }))
        .def(py::init(&homography_from_numpy), py::arg("matrix"))
        .def_property_readonly("matrix", &numpy_from_homography)
        .def("apply",
             [](const Homography& h, double x, double y) {
                 Point p = h.apply({x, y});
                 return py::make_tuple(p.x, p.y);
             },
             py::arg("x"), py::arg("y"))
        .def("inverted", &Homography::inverted)
        .def("__repr__", [](const Homography& h) {
            return "Homography(" + py::str(numpy_from_homography(h)).cast<std::string>() +
                   ")";
        });

    m.def(
        "estimate_homography",
        [](const py::array_t<double>& src, const py::array_t<double>& dst) {
            return estimate_homography(correspondences_from_numpy(src, dst));
        },
        py::arg("src"), py::arg("dst"),
        "Estimate a homography from N>=4 point correspondences (N x 2 arrays).");

    m.def(
        "warp_to_target",
        [](const Homography& h, const NumpyImage& source, int width, int height) {
            WarpResult r = warp_to_target(h, buffer_from_numpy(source), width, height);
            return py::make_tuple(numpy_from_buffer(r.image), numpy_from_buffer(r.mask));
        },
        py::arg("source_to_target"), py::arg("source"), py::arg("target_width"),
        py::arg("target_height"),
        "Warp an image into a target raster; returns (image, validity_mask).");

    m.def(
        "fuse_pixels",
        [](const NumpyImage& rgb, const NumpyImage& lwir3, const NumpyImage& mask,
           double alpha) {
            FusionPolicy policy;
            policy.alpha = alpha;
            return numpy_from_buffer(fuse_pixels(buffer_from_numpy(rgb),
                                                 buffer_from_numpy(lwir3),
                                                 buffer_from_numpy(mask), policy));
        },
        py::arg("rgb"), py::arg("lwir3"), py::arg("mask"), py::arg("alpha") = 0.5,
        "Blend a warped 3-channel LWIR frame into an RGB frame.");

    m.def(
        "read_image",
        [](const std::filesystem::path& path) {
            return numpy_from_buffer(read_image(path));
        },
        py::arg("path"), "Read a binary PGM/PPM file into a numpy array.");
    m.def(
        "write_image",
        [](const std::filesystem::path& path, const NumpyImage& image) {
            write_image(path, buffer_from_numpy(image));
        },
        py::arg("path"), py::arg("image"), "Write a numpy array as binary PGM/PPM.");

    py::class_<FramePair>(m, "FramePair")
        .def_readonly("tick_ns", &FramePair::tick_ns)
        .def_readonly("lwir_index", &FramePair::lwir_index)
        .def_readonly("rgb_index", &FramePair::rgb_index)
        .def_readonly("lwir_timestamp_ns", &FramePair::lwir_timestamp_ns)
        .def_readonly("rgb_timestamp_ns", &FramePair::rgb_timestamp_ns)
        .def_readonly("skew_ns", &FramePair::skew_ns)
        .def("__repr__", [](const FramePair& p) {
            return "FramePair(tick_ns=" + std::to_string(p.tick_ns) +
                   ", lwir_index=" + std::to_string(p.lwir_index) +
                   ", rgb_index=" + std::to_string(p.rgb_index) +
                   ", skew_ns=" + std::to_string(p.skew_ns) + ")";
        });

    m.def(
        "pair_streams",
        [](const std::filesystem::path& lwir_manifest,
           const std::filesystem::path& rgb_manifest, double rate_hz,
           std::int64_t tolerance_ns, bool allow_reuse) {
            PairingPolicy policy;
            policy.target_rate_hz = rate_hz;
            policy.tolerance_ns = tolerance_ns;
            policy.allow_reuse = allow_reuse;
            return pair_streams(read_manifest(lwir_manifest), read_manifest(rgb_manifest),
                                policy);
        },
        py::arg("lwir_manifest"), py::arg("rgb_manifest"), py::arg("rate_hz") = 30.0,
        py::arg("tolerance_ns") = std::int64_t{16666667}, py::arg("allow_reuse") = true,
        "Pair two stream manifests onto a common tick grid.");

    py::class_<Detection>(m, "Detection")
        .def(py::init([](std::int64_t frame_index, const std::array<double, 4>& box,
                         double confidence, int class_id) {
                 Detection d{frame_index, box_from_tuple(box), confidence, class_id};
                 d.box.validate();
                 return d;
             }),
             py::arg("frame_index"), py::arg("box"), py::arg("confidence"),
             py::arg("class_id") = 0)
        .def_readonly("frame_index", &Detection::frame_index)
        .def_property_readonly("box",
                               [](const Detection& d) {
                                   return py::make_tuple(d.box.x_min, d.box.y_min,
                                                         d.box.x_max, d.box.y_max);
                               })
        .def_readonly("confidence", &Detection::confidence)
        .def_readonly("class_id", &Detection::class_id);

    py::class_<GroundTruthLabel>(m, "GroundTruthLabel")
        .def(py::init([](std::int64_t frame_index, const std::array<double, 4>& box,
                         int class_id) {
                 GroundTruthLabel l{frame_index, box_from_tuple(box), class_id};
                 l.box.validate();
                 return l;
             }),
             py::arg("frame_index"), py::arg("box"), py::arg("class_id") = 0)
        .def_readonly("frame_index", &GroundTruthLabel::frame_index)
        .def_property_readonly("box",
                               [](const GroundTruthLabel& l) {
                                   return py::make_tuple(l.box.x_min, l.box.y_min,
                                                         l.box.x_max, l.box.y_max);
                               })
        .def_readonly("class_id", &GroundTruthLabel::class_id);

    m.def("read_detections", &read_detections, py::arg("path"));
    m.def("write_detections", &write_detections, py::arg("path"), py::arg("detections"));
    m.def("read_labels", &read_labels, py::arg("path"));
    m.def("write_labels", &write_labels, py::arg("path"), py::arg("labels"));

    m.def(
        "iou",
        [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
            return iou(box_from_tuple(a), box_from_tuple(b));
        },
        py::arg("box_a"), py::arg("box_b"),
        "Intersection over union of two (x_min, y_min, x_max, y_max) boxes.");

    py::class_<MatchResult>(m, "MatchResult")
        .def_readonly("frame_index", &MatchResult::frame_index)
        .def_readonly("tp", &MatchResult::tp)
        .def_readonly("fp", &MatchResult::fp)
        .def_readonly("fn", &MatchResult::fn);

    m.def("match_frame", &match_frame, py::arg("detections"), py::arg("labels"),
          py::arg("iou_threshold") = 0.5,
          "Greedy confidence-ordered IoU matching within one frame.");

    py::class_<ScenarioMetrics>(m, "ScenarioMetrics")
        .def_readonly("scenario_id", &ScenarioMetrics::scenario_id)
        .def_readonly("ct", &ScenarioMetrics::ct)
        .def_readonly("dr", &ScenarioMetrics::dr)
        .def_readonly("far", &ScenarioMetrics::far)
        .def_readonly("tp", &ScenarioMetrics::tp)
        .def_readonly("fp", &ScenarioMetrics::fp)
        .def_readonly("fn", &ScenarioMetrics::fn);

    m.def("evaluate_scenario", &evaluate_scenario, py::arg("scenario_id"),
          py::arg("detections"), py::arg("labels"),
          py::arg("ct_list") = default_ct_list(), py::arg("iou_threshold") = 0.5,
          "Micro-averaged DR/FAR of one scenario at each confidence threshold.");

    m.def("detection_rate", &detection_rate, py::arg("tp"), py::arg("fn"));
    m.def("false_alarm_rate", &false_alarm_rate, py::arg("fp"), py::arg("tp"));

    m.def(
        "oracle_detect",
        [](const NumpyImage& frame, std::int64_t frame_index, const std::string& mode) {
            return oracle_detect_frame(buffer_from_numpy(frame), frame_index,
                                       oracle_mode_from_string(mode));
        },
        py::arg("frame"), py::arg("frame_index"), py::arg("mode"),
        "Run the reference blob detector (hot_blob, dark_blob, fused_blob) on one "
        "frame.");

    m.def(
        "generate_scenario",
        [](const std::string& scenario_id, const std::filesystem::path& out_dir,
           std::optional<std::uint64_t> seed) {
            SceneSpec spec = builtin_spec(scenario_id);
            if (seed) spec.seed = *seed;
            RenderedScenario r = generate_scenario(spec, out_dir);
            py::dict out;
            out["scenario_id"] = r.scenario_id;
            out["lwir_frames"] = r.lwir_manifest.entries.size();
            out["rgb_frames"] = r.rgb_manifest.entries.size();
            out["lwir_labels"] = r.lwir_labels.size();
            out["rgb_labels"] = r.rgb_labels.size();
            return out;
        },
        py::arg("scenario_id"), py::arg("out_dir"), py::arg("seed") = std::nullopt,
        "Render a builtin scenario to disk and return its inventory.");

    m.def("builtin_scenarios", [] {
        std::vector<std::string> names;
        for (const auto& spec : builtin_specs()) names.push_back(spec.scenario_id);
        return names;
    });
}

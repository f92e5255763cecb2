#include "spectrafuse/synthgen.hpp"

#include "spectrafuse/error.hpp"
#include "parallel.hpp"
#include "textio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace spectrafuse {

namespace {

constexpr double kLabelContrast = 25.0;
constexpr double kPi = 3.14159265358979323846;
constexpr int kBlurRadius = 7;
constexpr std::size_t kMinBlobArea = 4;
constexpr int kYellowMargin = 60;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic per-sample noise in [-amplitude, amplitude], independent
/// of pixel visit order so threaded rendering stays reproducible.
double hash_noise(std::uint64_t seed, std::uint64_t frame, int x, int y, int channel,
                  double amplitude) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ frame);
    h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32 |
                        static_cast<std::uint32_t>(y)));
    h = splitmix64(h ^ static_cast<std::uint64_t>(channel));
    double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
    return (unit * 2.0 - 1.0) * amplitude;
}

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::clamp<long long>(std::llround(v), 0, 255));
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

struct ScenePalette {
    double lwir_sky_near = 20.0;
    double lwir_sky_far = 40.0;
    double lwir_band = 60.0;
    std::array<double, 3> rgb_sky_near{150.0, 160.0, 190.0};
    std::array<double, 3> rgb_sky_far{220.0, 225.0, 235.0};
    std::array<double, 3> rgb_band{100.0, 105.0, 110.0};
    double rgb_band_noise = 0.0;
};

ScenePalette palette_for(BackgroundKind kind) {
    ScenePalette p;
    if (kind == BackgroundKind::Treeline || kind == BackgroundKind::SunriseGlare) {
        p.lwir_band = 90.0;
        p.rgb_band = {70.0, 160.0, 70.0};
        p.rgb_band_noise = 15.0;
    }
    return p;
}

/// Continuous scene model in RGB pixel coordinates. The background is a
/// total function of the scene point, so LWIR pixels that look outside
/// the RGB frame still sample a well-defined value.
struct SceneModel {
    const SceneSpec& spec;
    ScenePalette palette;
    double horizon_y;

    explicit SceneModel(const SceneSpec& s)
        : spec(s), palette(palette_for(s.background)),
          horizon_y(s.horizon_frac * s.rgb_height) {}

    double sky_t(double y) const { return std::clamp(y / horizon_y, 0.0, 1.0); }

    double lwir_background(double y) const {
        if (y < horizon_y)
            return lerp(palette.lwir_sky_near, palette.lwir_sky_far, sky_t(y));
        return palette.lwir_band;
    }

    std::array<double, 3> rgb_background(double y) const {
        std::array<double, 3> out;
        if (y < horizon_y) {
            double t = sky_t(y);
            for (int c = 0; c < 3; ++c)
                out[c] = lerp(palette.rgb_sky_near[c], palette.rgb_sky_far[c], t);
        } else {
            out = palette.rgb_band;
        }
        return out;
    }

    double glare(double x, double y) const {
        if (spec.background != BackgroundKind::SunriseGlare) return 0.0;
        double d = std::hypot(x - spec.sun_center.x, y - spec.sun_center.y);
        return 235.0 * std::max(0.0, 1.0 - d / spec.sun_radius);
    }
};

Point entity_position(const Entity& entity, double t) {
    const auto& wp = entity.trajectory;
    if (t <= wp.front().t_s) return {wp.front().x, wp.front().y};
    if (t >= wp.back().t_s) return {wp.back().x, wp.back().y};
    for (std::size_t i = 1; i < wp.size(); ++i) {
        if (t <= wp[i].t_s) {
            double u = (t - wp[i - 1].t_s) / (wp[i].t_s - wp[i - 1].t_s);
            return {lerp(wp[i - 1].x, wp[i].x, u), lerp(wp[i - 1].y, wp[i].y, u)};
        }
    }
    return {wp.back().x, wp.back().y};
}

/// Anti-aliased disc coverage: 1 inside, 0 outside, linear ramp across
/// the half-pixel boundary band.
double disc_coverage(double dist, double radius) {
    return std::clamp(radius + 0.5 - dist, 0.0, 1.0);
}

std::vector<std::int64_t> frame_timestamps(double rate_hz, double duration_s) {
    auto count = static_cast<std::int64_t>(std::floor(duration_s * rate_hz + 1e-9)) + 1;
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i)
        out.push_back(std::llround(static_cast<double>(i) * 1e9 / rate_hz));
    return out;
}

struct EntityState {
    const Entity* entity;
    Point pos;
    double gate_sq;  // squared distance below which coverage can be nonzero
};

std::vector<EntityState> entity_states(const SceneSpec& spec, double t) {
    std::vector<EntityState> states;
    states.reserve(spec.entities.size());
    for (const auto& e : spec.entities) {
        double gate = e.radius_px + 0.5;
        states.push_back({&e, entity_position(e, t), gate * gate});
    }
    return states;
}

PixelBuffer render_rgb_frame(const SceneModel& scene, std::uint64_t frame_index, double t) {
    const SceneSpec& spec = scene.spec;
    PixelBuffer img = PixelBuffer::create(spec.rgb_width, spec.rgb_height, 3);
    auto states = entity_states(spec, t);
    bool glare_on = spec.background == BackgroundKind::SunriseGlare;
    detail::parallel_for(0, spec.rgb_height, [&](int y) {
        double py = y + 0.5;
        bool band = py >= scene.horizon_y;
        for (int x = 0; x < spec.rgb_width; ++x) {
            double px = x + 0.5;
            std::array<double, 3> v = scene.rgb_background(py);
            if (band && scene.palette.rgb_band_noise > 0.0) {
                for (int c = 0; c < 3; ++c)
                    v[c] += hash_noise(spec.seed, frame_index, x, y, c,
                                       scene.palette.rgb_band_noise);
            }
            for (const auto& s : states) {
                double dx = px - s.pos.x;
                double dy = py - s.pos.y;
                double d_sq = dx * dx + dy * dy;
                if (d_sq >= s.gate_sq) continue;
                double cov = disc_coverage(std::sqrt(d_sq), s.entity->radius_px);
                for (int c = 0; c < 3; ++c)
                    v[c] = lerp(v[c], s.entity->rgb_color[c], cov);
            }
            if (glare_on) {
                double g = scene.glare(px, py);
                for (int c = 0; c < 3; ++c) v[c] = std::min(255.0, v[c] + g);
            }
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = quantize(v[c]);
        }
    });
    return img;
}

PixelBuffer render_lwir_frame(const SceneModel& scene, double t) {
    const SceneSpec& spec = scene.spec;
    PixelBuffer img = PixelBuffer::create(spec.lwir_width, spec.lwir_height, 1);
    auto states = entity_states(spec, t);
    const auto& m = spec.true_homography.m;
    detail::parallel_for(0, spec.lwir_height, [&](int y) {
        double py = y + 0.5;
        for (int x = 0; x < spec.lwir_width; ++x) {
            double px = x + 0.5;
            double w = m[2][0] * px + m[2][1] * py + m[2][2];
            double qx = (m[0][0] * px + m[0][1] * py + m[0][2]) / w;
            double qy = (m[1][0] * px + m[1][1] * py + m[1][2]) / w;
            double v = scene.lwir_background(qy);
            for (const auto& s : states) {
                double dx = qx - s.pos.x;
                double dy = qy - s.pos.y;
                double d_sq = dx * dx + dy * dy;
                if (d_sq >= s.gate_sq) continue;
                double cov = disc_coverage(std::sqrt(d_sq), s.entity->radius_px);
                v = lerp(v, s.entity->lwir_intensity, cov);
            }
            img.at(x, y, 0) = quantize(v);
        }
    });
    return img;
}

/// Noise-free RGB scene value at a point, glare included, for the label
/// contrast rule.
std::array<double, 3> rgb_scene_value(const SceneModel& scene, double x, double y,
                                      const std::array<std::uint8_t, 3>* entity_color) {
    std::array<double, 3> v;
    if (entity_color) {
        for (int c = 0; c < 3; ++c) v[c] = (*entity_color)[c];
    } else {
        v = scene.rgb_background(y);
    }
    double g = scene.glare(x, y);
    for (int c = 0; c < 3; ++c) v[c] = std::min(255.0, v[c] + g);
    return v;
}

double mean3(const std::array<double, 3>& v) { return (v[0] + v[1] + v[2]) / 3.0; }

bool rgb_contrast_visible(const SceneModel& scene, const Entity& entity, Point pos) {
    double fg = mean3(rgb_scene_value(scene, pos.x, pos.y, &entity.rgb_color));
    double bg = mean3(rgb_scene_value(scene, pos.x, pos.y, nullptr));
    return std::abs(fg - bg) > kLabelContrast;
}

bool lwir_contrast_visible(const SceneModel& scene, const Entity& entity, Point pos) {
    double bg = scene.lwir_background(pos.y);
    return std::abs(static_cast<double>(entity.lwir_intensity) - bg) > kLabelContrast;
}

bool clamp_box(BoundingBox& box, double width, double height) {
    box.x_min = std::max(box.x_min, 0.0);
    box.y_min = std::max(box.y_min, 0.0);
    box.x_max = std::min(box.x_max, width);
    box.y_max = std::min(box.y_max, height);
    return box.x_max > box.x_min && box.y_max > box.y_min;
}

BoundingBox disc_box(Point pos, double radius) {
    return {pos.x - radius, pos.y - radius, pos.x + radius, pos.y + radius};
}

/// Disc footprint bounds in LWIR coordinates, traced through the inverse
/// homography along the disc boundary.
BoundingBox lwir_disc_box(const Homography& rgb_to_lwir, Point pos, double radius) {
    constexpr int kBoundarySamples = 32;
    BoundingBox box{1e30, 1e30, -1e30, -1e30};
    for (int i = 0; i < kBoundarySamples; ++i) {
        double a = 2.0 * kPi * i / kBoundarySamples;
        Point q = rgb_to_lwir.apply(
            {pos.x + radius * std::cos(a), pos.y + radius * std::sin(a)});
        box.x_min = std::min(box.x_min, q.x);
        box.y_min = std::min(box.y_min, q.y);
        box.x_max = std::max(box.x_max, q.x);
        box.y_max = std::max(box.y_max, q.y);
    }
    return box;
}

std::string frame_name(const char* prefix, std::int64_t index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s/frame_%06lld.%s", prefix,
                  static_cast<long long>(index), ext);
    return buf;
}

}  // namespace

std::string to_string(BackgroundKind kind) {
    switch (kind) {
        case BackgroundKind::SkyGradient: return "sky_gradient";
        case BackgroundKind::Treeline: return "treeline";
        case BackgroundKind::SunriseGlare: return "sunrise_glare";
    }
    throw ValidationError("unknown background kind");
}

BackgroundKind background_from_string(const std::string& text) {
    if (text == "sky_gradient") return BackgroundKind::SkyGradient;
    if (text == "treeline") return BackgroundKind::Treeline;
    if (text == "sunrise_glare") return BackgroundKind::SunriseGlare;
    throw ValidationError("unknown background '" + text +
                          "' (expected sky_gradient, treeline, or sunrise_glare)");
}

std::string to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::Drone: return "drone";
        case EntityKind::Lamp: return "lamp";
        case EntityKind::Bird: return "bird";
    }
    throw ValidationError("unknown entity kind");
}

EntityKind entity_kind_from_string(const std::string& text) {
    if (text == "drone") return EntityKind::Drone;
    if (text == "lamp") return EntityKind::Lamp;
    if (text == "bird") return EntityKind::Bird;
    throw ValidationError("unknown entity kind '" + text +
                          "' (expected drone, lamp, or bird)");
}

std::string to_string(OracleMode mode) {
    switch (mode) {
        case OracleMode::HotBlob: return "hot_blob";
        case OracleMode::DarkBlob: return "dark_blob";
        case OracleMode::FusedBlob: return "fused_blob";
    }
    throw ValidationError("unknown oracle mode");
}

OracleMode oracle_mode_from_string(const std::string& text) {
    if (text == "hot_blob") return OracleMode::HotBlob;
    if (text == "dark_blob") return OracleMode::DarkBlob;
    if (text == "fused_blob") return OracleMode::FusedBlob;
    throw ValidationError("unknown oracle mode '" + text +
                          "' (expected hot_blob, dark_blob, or fused_blob)");
}

void SceneSpec::validate() const {
    if (scenario_id.empty())
        throw ValidationError("scene spec needs a scenario_id");
    for (char ch : scenario_id) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
            throw ValidationError("scenario_id '" + scenario_id +
                                  "' may only contain letters, digits, '_' and '-'");
    }
    if (!(duration_s >= 0.0))
        throw ValidationError("duration_s must be non-negative");
    if (!(lwir_rate_hz > 0.0) || !(rgb_rate_hz > 0.0))
        throw ValidationError("frame rates must be positive");
    if (lwir_width <= 0 || lwir_height <= 0 || rgb_width <= 0 || rgb_height <= 0)
        throw ValidationError("image dimensions must be positive");
    if (!(horizon_frac > 0.0) || !(horizon_frac < 1.0))
        throw ValidationError("horizon_frac must lie in (0, 1)");
    if (!(sun_radius > 0.0))
        throw ValidationError("sun_radius must be positive");
    Homography rgb_to_lwir = true_homography.inverted();
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const Entity& e = entities[i];
        std::string tag = "entity " + std::to_string(i);
        if (!(e.radius_px > 0.0))
            throw ValidationError(tag + ": radius_px must be positive");
        if (e.trajectory.empty())
            throw ValidationError(tag + ": needs at least one waypoint");
        for (std::size_t k = 1; k < e.trajectory.size(); ++k) {
            if (!(e.trajectory[k].t_s > e.trajectory[k - 1].t_s))
                throw ValidationError(tag + ": waypoint times must strictly increase");
        }
        bool visible = false;
        for (const auto& ts : frame_timestamps(rgb_rate_hz, duration_s)) {
            Point pos = entity_position(e, static_cast<double>(ts) / 1e9);
            BoundingBox rgb_box = disc_box(pos, e.radius_px);
            if (clamp_box(rgb_box, rgb_width, rgb_height)) {
                visible = true;
                break;
            }
            BoundingBox lwir_box = lwir_disc_box(rgb_to_lwir, pos, e.radius_px);
            if (clamp_box(lwir_box, lwir_width, lwir_height)) {
                visible = true;
                break;
            }
        }
        if (!visible)
            throw ValidationError(tag + ": never enters either camera's view");
    }
}

RenderedScenario generate_scenario(const SceneSpec& spec,
                                   const std::filesystem::path& out_dir) {
    spec.validate();
    SceneModel scene(spec);
    Homography rgb_to_lwir = spec.true_homography.inverted();

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "lwir", ec);
    if (!ec) std::filesystem::create_directories(out_dir / "rgb", ec);
    if (ec)
        throw IoError("cannot create scenario directory " + out_dir.string() + ": " +
                      ec.message());

    RenderedScenario result;
    result.scenario_id = spec.scenario_id;
    result.condition = spec.condition;
    result.true_homography = spec.true_homography;
    result.lwir_manifest.spectrum = Spectrum::LWIR;
    result.lwir_manifest.source_id = spec.scenario_id + "-lwir";
    result.rgb_manifest.spectrum = Spectrum::RGB;
    result.rgb_manifest.source_id = spec.scenario_id + "-rgb";

    auto label_frame = [&](std::int64_t index, double t, bool lwir_side) {
        for (const auto& e : spec.entities) {
            if (e.kind != EntityKind::Drone) continue;
            Point pos = entity_position(e, t);
            BoundingBox box;
            bool visible;
            if (lwir_side) {
                visible = lwir_contrast_visible(scene, e, pos);
                box = lwir_disc_box(rgb_to_lwir, pos, e.radius_px);
                if (!clamp_box(box, spec.lwir_width, spec.lwir_height)) continue;
            } else {
                visible = rgb_contrast_visible(scene, e, pos);
                box = disc_box(pos, e.radius_px);
                if (!clamp_box(box, spec.rgb_width, spec.rgb_height)) continue;
            }
            if (!visible) continue;
            auto& sink = lwir_side ? result.lwir_labels : result.rgb_labels;
            sink.push_back({index, box, 0});
        }
    };

    for (int side = 0; side < 2; ++side) {
        bool lwir_side = side == 0;
        double rate = lwir_side ? spec.lwir_rate_hz : spec.rgb_rate_hz;
        auto stamps = frame_timestamps(rate, spec.duration_s);
        for (std::size_t i = 0; i < stamps.size(); ++i) {
            auto index = static_cast<std::int64_t>(i);
            double t = static_cast<double>(stamps[i]) / 1e9;
            std::string name = lwir_side ? frame_name("lwir", index, "pgm")
                                         : frame_name("rgb", index, "ppm");
            PixelBuffer img = lwir_side ? render_lwir_frame(scene, t)
                                        : render_rgb_frame(scene, i, t);
            write_image(out_dir / name, img);
            auto& manifest = lwir_side ? result.lwir_manifest : result.rgb_manifest;
            manifest.entries.push_back({index, stamps[i], name});
            label_frame(index, t, lwir_side);
        }
    }

    write_manifest(out_dir / "lwir.manifest", result.lwir_manifest);
    write_manifest(out_dir / "rgb.manifest", result.rgb_manifest);
    write_labels(out_dir / "lwir_labels.txt", result.lwir_labels);
    write_labels(out_dir / "rgb_labels.txt", result.rgb_labels);
    return result;
}

std::vector<SceneSpec> builtin_specs() {
    Homography h;
    h.m = {{{0.98, 0.008, -6.0}, {-0.005, 1.02, -2.0}, {1.2e-5, -8e-6, 1.0}}};

    auto drone = [](double radius, std::vector<Waypoint> wp) {
        Entity e;
        e.kind = EntityKind::Drone;
        e.radius_px = radius;
        e.lwir_intensity = 255;
        e.rgb_color = {110, 110, 110};
        e.trajectory = std::move(wp);
        return e;
    };

    SceneSpec treeline;
    treeline.scenario_id = "treeline";
    treeline.condition = DroneCount::Single;
    treeline.seed = 1001;
    treeline.background = BackgroundKind::Treeline;
    treeline.true_homography = h;
    treeline.entities = {drone(8.0, {{0.0, 60.0, 150.0},
                                     {3.3, 250.0, 360.0},
                                     {6.6, 420.0, 160.0},
                                     {10.0, 560.0, 360.0}})};

    SceneSpec sunrise;
    sunrise.scenario_id = "sunrise";
    sunrise.condition = DroneCount::Single;
    sunrise.seed = 1002;
    sunrise.background = BackgroundKind::SunriseGlare;
    sunrise.true_homography = h;
    sunrise.entities = {drone(8.0, {{0.0, 60.0, 120.0},
                                    {5.0, 306.0, 140.0},
                                    {10.0, 550.0, 160.0}})};

    SceneSpec lamps;
    lamps.scenario_id = "lamps";
    lamps.condition = DroneCount::Multiple;
    lamps.seed = 1003;
    lamps.background = BackgroundKind::Treeline;
    lamps.true_homography = h;
    lamps.entities = {drone(6.0, {{0.0, 80.0, 330.0}, {10.0, 540.0, 330.0}}),
                      drone(6.0, {{0.0, 540.0, 420.0}, {10.0, 100.0, 420.0}})};
    for (double cx : {150.0, 306.0, 460.0}) {
        Entity lamp;
        lamp.kind = EntityKind::Lamp;
        lamp.radius_px = 6.0;
        lamp.lwir_intensity = 255;
        lamp.rgb_color = {255, 255, 40};
        lamp.trajectory = {{0.0, cx, 310.0}};
        lamps.entities.push_back(lamp);
    }

    SceneSpec longrange;
    longrange.scenario_id = "longrange";
    longrange.condition = DroneCount::Single;
    longrange.seed = 1004;
    longrange.background = BackgroundKind::SkyGradient;
    longrange.true_homography = h;
    longrange.entities = {drone(2.0, {{0.0, 80.0, 80.0}, {10.0, 540.0, 120.0}})};

    return {treeline, sunrise, lamps, longrange};
}

SceneSpec builtin_spec(const std::string& scenario_id) {
    auto specs = builtin_specs();
    std::string names;
    for (const auto& s : specs) {
        if (s.scenario_id == scenario_id) return s;
        if (!names.empty()) names += ", ";
        names += s.scenario_id;
    }
    throw ValidationError("unknown scenario '" + scenario_id + "' (expected one of " +
                          names + ")");
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    SceneSpec spec;
    bool in_entity = false;
    bool saw_id = false;

    auto numbers = [&](const textio::Line& line, std::string_view value,
                       std::size_t count, std::string_view what) {
        auto fields = textio::split_fields(value);
        if (fields.size() != count)
            textio::fail_line(path, line.number,
                              std::string(what) + " needs " + std::to_string(count) +
                                  " values, found " + std::to_string(fields.size()));
        std::vector<double> out;
        for (const auto& f : fields)
            out.push_back(textio::parse_double(f, path, line.number, what));
        return out;
    };

    for (const auto& line : lines) {
        if (line.text.front() == '[') {
            std::string expected = "[entity " + std::to_string(spec.entities.size()) + "]";
            if (line.text != expected)
                textio::fail_line(path, line.number,
                                  "expected section header '" + expected + "', found '" +
                                      std::string(line.text) + "'");
            spec.entities.emplace_back();
            spec.entities.back().trajectory.clear();
            in_entity = true;
            continue;
        }
        auto eq = line.text.find('=');
        if (eq == std::string_view::npos)
            textio::fail_line(path, line.number, "expected 'key = value'");
        std::string key{textio::trim(line.text.substr(0, eq))};
        std::string value{textio::trim(line.text.substr(eq + 1))};
        if (key.empty() || value.empty())
            textio::fail_line(path, line.number, "expected 'key = value'");

        try {
            if (in_entity) {
                Entity& e = spec.entities.back();
                if (key == "kind") {
                    e.kind = entity_kind_from_string(value);
                } else if (key == "radius_px") {
                    e.radius_px = textio::parse_double(value, path, line.number, key);
                } else if (key == "lwir_intensity") {
                    auto v = textio::parse_int(value, path, line.number, key);
                    if (v < 0 || v > 255)
                        textio::fail_line(path, line.number,
                                          "lwir_intensity must lie in [0, 255]");
                    e.lwir_intensity = static_cast<std::uint8_t>(v);
                } else if (key == "rgb_color") {
                    auto v = numbers(line, value, 3, key);
                    for (int c = 0; c < 3; ++c) {
                        if (v[c] < 0 || v[c] > 255 || v[c] != std::floor(v[c]))
                            textio::fail_line(path, line.number,
                                              "rgb_color values must be integers in "
                                              "[0, 255]");
                        e.rgb_color[c] = static_cast<std::uint8_t>(v[c]);
                    }
                } else if (key == "waypoint") {
                    auto v = numbers(line, value, 3, key);
                    e.trajectory.push_back({v[0], v[1], v[2]});
                } else {
                    textio::fail_line(path, line.number,
                                      "unknown entity key '" + key + "'");
                }
            } else if (key == "scenario_id") {
                spec.scenario_id = value;
                saw_id = true;
            } else if (key == "condition") {
                spec.condition = drone_count_from_string(value);
            } else if (key == "duration_s") {
                spec.duration_s = textio::parse_double(value, path, line.number, key);
            } else if (key == "seed") {
                auto v = textio::parse_int(value, path, line.number, key);
                if (v < 0)
                    textio::fail_line(path, line.number, "seed must be non-negative");
                spec.seed = static_cast<std::uint64_t>(v);
            } else if (key == "lwir_rate_hz") {
                spec.lwir_rate_hz = textio::parse_double(value, path, line.number, key);
            } else if (key == "rgb_rate_hz") {
                spec.rgb_rate_hz = textio::parse_double(value, path, line.number, key);
            } else if (key == "lwir_size" || key == "rgb_size") {
                auto v = numbers(line, value, 2, key);
                if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]))
                    textio::fail_line(path, line.number, "sizes must be integers");
                int w = static_cast<int>(v[0]);
                int h = static_cast<int>(v[1]);
                if (key == "lwir_size") {
                    spec.lwir_width = w;
                    spec.lwir_height = h;
                } else {
                    spec.rgb_width = w;
                    spec.rgb_height = h;
                }
            } else if (key == "background") {
                spec.background = background_from_string(value);
            } else if (key == "horizon_frac") {
                spec.horizon_frac = textio::parse_double(value, path, line.number, key);
            } else if (key == "sun_center") {
                auto v = numbers(line, value, 2, key);
                spec.sun_center = {v[0], v[1]};
            } else if (key == "sun_radius") {
                spec.sun_radius = textio::parse_double(value, path, line.number, key);
            } else if (key == "homography") {
                auto v = numbers(line, value, 9, key);
                for (int i = 0; i < 9; ++i)
                    spec.true_homography.m[i / 3][i % 3] = v[static_cast<std::size_t>(i)];
            } else {
                textio::fail_line(path, line.number, "unknown scene key '" + key + "'");
            }
        } catch (const ValidationError& e) {
            textio::fail_line(path, line.number, e.what());
        }
    }

    if (!saw_id)
        throw ParseError(path.string() + ": scene spec is missing scenario_id");
    try {
        spec.validate();
    } catch (const ValidationError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return spec;
}

void write_scene_spec(const std::filesystem::path& path, const SceneSpec& spec) {
    std::string out;
    auto kv = [&](const char* key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    kv("scenario_id", spec.scenario_id);
    kv("condition", to_string(spec.condition));
    kv("duration_s", textio::format_double(spec.duration_s));
    kv("seed", std::to_string(spec.seed));
    kv("lwir_rate_hz", textio::format_double(spec.lwir_rate_hz));
    kv("rgb_rate_hz", textio::format_double(spec.rgb_rate_hz));
    kv("lwir_size",
       std::to_string(spec.lwir_width) + " " + std::to_string(spec.lwir_height));
    kv("rgb_size", std::to_string(spec.rgb_width) + " " + std::to_string(spec.rgb_height));
    kv("background", to_string(spec.background));
    kv("horizon_frac", textio::format_double(spec.horizon_frac));
    kv("sun_center", textio::format_double(spec.sun_center.x) + " " +
                         textio::format_double(spec.sun_center.y));
    kv("sun_radius", textio::format_double(spec.sun_radius));
    std::string hline;
    for (int i = 0; i < 9; ++i) {
        if (i) hline += ' ';
        hline += textio::format_double(spec.true_homography.m[i / 3][i % 3]);
    }
    kv("homography", hline);
    for (std::size_t i = 0; i < spec.entities.size(); ++i) {
        const Entity& e = spec.entities[i];
        out += "\n[entity " + std::to_string(i) + "]\n";
        kv("kind", to_string(e.kind));
        kv("radius_px", textio::format_double(e.radius_px));
        kv("lwir_intensity", std::to_string(e.lwir_intensity));
        kv("rgb_color", std::to_string(e.rgb_color[0]) + " " +
                            std::to_string(e.rgb_color[1]) + " " +
                            std::to_string(e.rgb_color[2]));
        for (const auto& wp : e.trajectory)
            kv("waypoint", textio::format_double(wp.t_s) + " " +
                               textio::format_double(wp.x) + " " +
                               textio::format_double(wp.y));
    }
    textio::write_file(path, out);
}

std::vector<Detection> oracle_detect_frame(const PixelBuffer& frame,
                                           std::int64_t frame_index, OracleMode mode) {
    frame.validate();
    if (frame.channels != 1 && frame.channels != 3)
        throw ValidationError("oracle expects a 1- or 3-channel frame, got " +
                              std::to_string(frame.channels));
    int w = frame.width;
    int h = frame.height;
    auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);

    // Pixel brightness scaled by 3 so 1- and 3-channel math stays integral.
    std::vector<std::int32_t> s3(n);
    std::vector<bool> yellow(n, false);
    if (frame.channels == 1) {
        for (std::size_t i = 0; i < n; ++i) s3[i] = 3 * frame.samples[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            int r = frame.samples[3 * i];
            int g = frame.samples[3 * i + 1];
            int b = frame.samples[3 * i + 2];
            s3[i] = r + g + b;
            yellow[i] = r >= b + kYellowMargin && g >= b + kYellowMargin;
        }
    }

    double frame_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) frame_mean += s3[i];
    frame_mean /= 3.0 * static_cast<double>(n);

    bool need_dark = mode != OracleMode::HotBlob;
    std::vector<std::int64_t> integral;
    if (need_dark) {
        // integral[(y+1)*(w+1) + (x+1)] = sum of s3 over [0,x] x [0,y]
        integral.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0);
        for (int y = 0; y < h; ++y) {
            std::int64_t row = 0;
            for (int x = 0; x < w; ++x) {
                row += s3[static_cast<std::size_t>(y) * w + x];
                integral[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] =
                    integral[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
            }
        }
    }

    auto box_sum = [&](int x0, int y0, int x1, int y1) {
        // inclusive pixel rect [x0,x1] x [y0,y1]
        return integral[static_cast<std::size_t>(y1 + 1) * (w + 1) + x1 + 1] -
               integral[static_cast<std::size_t>(y0) * (w + 1) + x1 + 1] -
               integral[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
               integral[static_cast<std::size_t>(y0) * (w + 1) + x0];
    };

    std::vector<bool> candidate(n, false);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            bool hot = s3[i] >= 3 * 180;
            bool dark = false;
            if (need_dark) {
                int x0 = std::max(0, x - kBlurRadius);
                int y0 = std::max(0, y - kBlurRadius);
                int x1 = std::min(w - 1, x + kBlurRadius);
                int y1 = std::min(h - 1, y + kBlurRadius);
                auto cnt = static_cast<std::int64_t>(x1 - x0 + 1) * (y1 - y0 + 1);
                // mean - blur <= -25, scaled by 3 * cnt to stay integral
                dark = static_cast<std::int64_t>(s3[i]) * cnt <=
                       box_sum(x0, y0, x1, y1) - 75 * cnt;
            }
            bool on;
            switch (mode) {
                case OracleMode::HotBlob: on = hot; break;
                case OracleMode::DarkBlob: on = dark; break;
                default: on = (hot || dark) && !yellow[i]; break;
            }
            candidate[i] = on;
        }
    }

    std::vector<Detection> detections;
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t start = static_cast<std::size_t>(y) * w + x;
            if (!candidate[start] || seen[start]) continue;
            seen[start] = true;
            stack.assign(1, start);
            int min_x = x, max_x = x, min_y = y, max_y = y;
            std::size_t area = 0;
            double peak = 0.0;
            while (!stack.empty()) {
                std::size_t i = stack.back();
                stack.pop_back();
                int cx = static_cast<int>(i % static_cast<std::size_t>(w));
                int cy = static_cast<int>(i / static_cast<std::size_t>(w));
                ++area;
                min_x = std::min(min_x, cx);
                max_x = std::max(max_x, cx);
                min_y = std::min(min_y, cy);
                max_y = std::max(max_y, cy);
                peak = std::max(peak, std::abs(s3[i] / 3.0 - frame_mean));
                const int dx[4] = {1, -1, 0, 0};
                const int dy[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int nx = cx + dx[k];
                    int ny = cy + dy[k];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                    if (!candidate[j] || seen[j]) continue;
                    seen[j] = true;
                    stack.push_back(j);
                }
            }
            if (area < kMinBlobArea) continue;
            Detection det;
            det.frame_index = frame_index;
            det.box = {static_cast<double>(min_x), static_cast<double>(min_y),
                       static_cast<double>(max_x + 1), static_cast<double>(max_y + 1)};
            det.confidence = std::min(1.0, peak / 100.0);
            det.class_id = 0;
            detections.push_back(det);
        }
    }
    return detections;
}

std::vector<Detection> oracle_detect_stream(const std::filesystem::path& manifest_path,
                                            OracleMode mode) {
    StreamManifest manifest = read_manifest(manifest_path);
    std::filesystem::path base = manifest_path.parent_path();
    std::vector<std::vector<Detection>> slots(manifest.entries.size());
    detail::parallel_for(0, static_cast<int>(manifest.entries.size()), [&](int i) {
        const FrameEntry& entry = manifest.entries[static_cast<std::size_t>(i)];
        PixelBuffer img = read_image(base / entry.relative_path);
        slots[static_cast<std::size_t>(i)] = oracle_detect_frame(img, entry.index, mode);
    });
    std::vector<Detection> out;
    for (auto& slot : slots) out.insert(out.end(), slot.begin(), slot.end());
    return out;
}

}  // namespace spectrafuse

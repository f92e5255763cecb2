#include "spectrafuse/fusion.hpp"

#include "spectrafuse/error.hpp"
#include "textio.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace spectrafuse {

namespace {

void check_alpha(double alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) {
        throw ValidationError("alpha " + textio::format_double(alpha) +
                              " outside [0, 1]");
    }
}

std::unordered_map<std::int64_t, const FrameEntry*> index_entries(
    const StreamManifest& manifest) {
    std::unordered_map<std::int64_t, const FrameEntry*> map;
    map.reserve(manifest.entries.size());
    for (const FrameEntry& entry : manifest.entries) {
        map.emplace(entry.index, &entry);
    }
    return map;
}

std::string frame_name(std::size_t ordinal) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06zu.ppm", ordinal);
    return buf;
}

}  // namespace

PixelBuffer fuse_pixels(const PixelBuffer& rgb, const PixelBuffer& lwir3,
                        const PixelBuffer& mask, const FusionPolicy& policy) {
    rgb.validate();
    lwir3.validate();
    mask.validate();
    check_alpha(policy.alpha);
    if (rgb.channels != 3 || lwir3.channels != 3) {
        throw ValidationError("fusion requires 3-channel rgb and lwir buffers, got " +
                              std::to_string(rgb.channels) + " and " +
                              std::to_string(lwir3.channels));
    }
    if (rgb.width != lwir3.width || rgb.height != lwir3.height ||
        rgb.width != mask.width || rgb.height != mask.height) {
        throw ValidationError("fusion buffers disagree on dimensions");
    }
    if (mask.channels != 1) {
        throw ValidationError("fusion mask must have 1 channel");
    }

    PixelBuffer out = rgb;
    const double alpha = policy.alpha;
    const std::size_t pixels = static_cast<std::size_t>(rgb.width) *
                               static_cast<std::size_t>(rgb.height);
    for (std::size_t i = 0; i < pixels; ++i) {
        std::uint8_t m = mask.samples[i];
        if (m == 0) continue;
        if (m != 255) {
            throw ValidationError("mask sample " + std::to_string(m) +
                                  " is neither 0 nor 255");
        }
        for (std::size_t c = 0; c < 3; ++c) {
            std::size_t s = i * 3 + c;
            double blended = alpha * lwir3.samples[s] + (1.0 - alpha) * rgb.samples[s];
            long long rounded = std::llround(blended);
            if (rounded < 0) rounded = 0;
            if (rounded > 255) rounded = 255;
            out.samples[s] = static_cast<std::uint8_t>(rounded);
        }
    }
    return out;
}

StreamManifest fuse_sequence(const std::vector<FramePair>& pairs,
                             const Homography& lwir_to_rgb,
                             const StreamManifest& lwir_manifest,
                             const std::filesystem::path& lwir_dir,
                             const StreamManifest& rgb_manifest,
                             const std::filesystem::path& rgb_dir,
                             const std::filesystem::path& out_dir,
                             const FusionPolicy& policy,
                             const std::optional<ColorLut>& lut) {
    check_alpha(policy.alpha);
    lwir_manifest.validate();
    rgb_manifest.validate();
    std::filesystem::create_directories(out_dir);

    auto lwir_by_index = index_entries(lwir_manifest);
    auto rgb_by_index = index_entries(rgb_manifest);

    StreamManifest fused;
    fused.spectrum = Spectrum::FUSED;
    fused.source_id = lwir_manifest.source_id + "+" + rgb_manifest.source_id;

    int stream_w = 0;
    int stream_h = 0;
    for (std::size_t ordinal = 0; ordinal < pairs.size(); ++ordinal) {
        const FramePair& pair = pairs[ordinal];
        std::string context = "pair at tick " + std::to_string(pair.tick_ns) + ": ";

        auto li = lwir_by_index.find(pair.lwir_index);
        if (li == lwir_by_index.end()) {
            throw ValidationError(context + "LWIR index " +
                                  std::to_string(pair.lwir_index) +
                                  " not present in manifest");
        }
        auto ri = rgb_by_index.find(pair.rgb_index);
        if (ri == rgb_by_index.end()) {
            throw ValidationError(context + "RGB index " +
                                  std::to_string(pair.rgb_index) +
                                  " not present in manifest");
        }

        PixelBuffer lwir, rgb;
        try {
            lwir = read_image(lwir_dir / li->second->relative_path);
            rgb = read_image(rgb_dir / ri->second->relative_path);
        } catch (const IoError& e) {
            throw IoError(context + e.what());
        } catch (const ParseError& e) {
            throw ParseError(context + e.what());
        }
        if (rgb.channels != 3) {
            throw ValidationError(context + "RGB frame has " +
                                  std::to_string(rgb.channels) + " channels");
        }
        if (stream_w == 0) {
            stream_w = rgb.width;
            stream_h = rgb.height;
        } else if (rgb.width != stream_w || rgb.height != stream_h) {
            throw ValidationError(context + "RGB frame is " +
                                  std::to_string(rgb.width) + "x" +
                                  std::to_string(rgb.height) + ", stream started at " +
                                  std::to_string(stream_w) + "x" +
                                  std::to_string(stream_h));
        }

        PixelBuffer lwir3;
        if (lwir.channels == 3) {
            // Already colorized upstream; blend it as delivered.
            lwir3 = std::move(lwir);
        } else if (lut.has_value()) {
            lwir3 = apply_lut(lwir, *lut);
        } else {
            lwir3 = expand_lwir(lwir);
        }

        WarpResult warped = warp_to_target(lwir_to_rgb, lwir3, rgb.width, rgb.height);
        PixelBuffer out = fuse_pixels(rgb, warped.image, warped.mask, policy);

        std::string name = frame_name(ordinal);
        write_image(out_dir / name, out);

        FrameEntry entry;
        entry.index = static_cast<std::int64_t>(ordinal);
        entry.timestamp_ns = pair.tick_ns;
        entry.relative_path = name;
        fused.entries.push_back(std::move(entry));
    }

    write_manifest(out_dir / "fused.manifest", fused);
    return fused;
}

}  // namespace spectrafuse

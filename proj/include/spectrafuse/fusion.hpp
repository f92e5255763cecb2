#pragma once

#include "spectrafuse/image.hpp"
#include "spectrafuse/registration.hpp"
#include "spectrafuse/sync.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace spectrafuse {

struct FusionPolicy {
    /// Weight of the LWIR term; the RGB term gets 1 - alpha.
    double alpha = 0.5;
};

/// Per-pixel weighted sum of a warped 3-channel LWIR frame and its RGB
/// frame: where the mask is 255, out = round(alpha * lwir3 +
/// (1 - alpha) * rgb), rounded half away from zero and clamped to
/// [0, 255]; where the mask is 0, the RGB pixel passes through unchanged.
PixelBuffer fuse_pixels(const PixelBuffer& rgb, const PixelBuffer& lwir3,
                        const PixelBuffer& mask, const FusionPolicy& policy = {});

/// Full-stream fusion: for every pair, loads both member frames, expands
/// LWIR to 3 channels (through the palette when given), warps it into RGB
/// geometry, fuses, and writes frame_<ordinal>.ppm plus a FUSED manifest
/// (fused.manifest) into out_dir. Entry index is the pair ordinal and the
/// timestamp is the pair's tick. Frame-load failures are reported with the
/// offending pair's tick.
StreamManifest fuse_sequence(const std::vector<FramePair>& pairs,
                             const Homography& lwir_to_rgb,
                             const StreamManifest& lwir_manifest,
                             const std::filesystem::path& lwir_dir,
                             const StreamManifest& rgb_manifest,
                             const std::filesystem::path& rgb_dir,
                             const std::filesystem::path& out_dir,
                             const FusionPolicy& policy = {},
                             const std::optional<ColorLut>& lut = std::nullopt);

}  // namespace spectrafuse

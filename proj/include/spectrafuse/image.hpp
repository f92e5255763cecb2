#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace spectrafuse {

/// 8-bit raster, row major, 1 (grayscale) or 3 (RGB) interleaved channels.
struct PixelBuffer {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> samples;

    static PixelBuffer create(int width, int height, int channels,
                              std::uint8_t fill = 0);

    std::uint8_t& at(int x, int y, int channel = 0) {
        return samples[static_cast<std::size_t>((y * width + x) * channels + channel)];
    }
    std::uint8_t at(int x, int y, int channel = 0) const {
        return samples[static_cast<std::size_t>((y * width + x) * channels + channel)];
    }

    bool empty() const { return samples.empty(); }

    /// Throws ValidationError unless dimensions, channel count, and sample
    /// storage are consistent.
    void validate() const;
};

enum class Spectrum { LWIR, RGB, FUSED };

std::string to_string(Spectrum spectrum);
Spectrum spectrum_from_string(const std::string& text);

/// One frame of a recorded stream as listed in a manifest.
struct FrameEntry {
    std::int64_t index = 0;
    std::int64_t timestamp_ns = 0;
    std::string relative_path;
};

/// Ordered list of frames captured by one sensor.
struct StreamManifest {
    Spectrum spectrum = Spectrum::LWIR;
    std::string source_id;
    std::vector<FrameEntry> entries;

    /// Throws ValidationError if indices are not strictly increasing,
    /// timestamps decrease, or a path is absolute or contains "..".
    void validate() const;
};

/// Reads a binary PGM (P5) or PPM (P6) file with maxval 255.
PixelBuffer read_image(const std::filesystem::path& path);

/// Writes PGM for 1-channel buffers, PPM for 3-channel buffers.
void write_image(const std::filesystem::path& path, const PixelBuffer& image);

StreamManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const StreamManifest& manifest);

/// Replicates a grayscale buffer into three identical channels.
PixelBuffer expand_lwir(const PixelBuffer& gray);

/// 256-entry grayscale-to-RGB palette.
using ColorLut = std::array<std::array<std::uint8_t, 3>, 256>;

ColorLut read_lut(const std::filesystem::path& path);

/// Maps a grayscale buffer through a palette.
PixelBuffer apply_lut(const PixelBuffer& gray, const ColorLut& lut);

}  // namespace spectrafuse

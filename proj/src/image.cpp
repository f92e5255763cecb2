#include "spectrafuse/image.hpp"

#include "spectrafuse/error.hpp"
#include "textio.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace spectrafuse {

namespace {

constexpr std::size_t kMaxDimension = 1 << 20;

/// Reads whitespace-and-comment separated header tokens from a PNM stream.
class HeaderScanner {
public:
    explicit HeaderScanner(std::istream& in, const std::filesystem::path& path)
        : in_(in), path_(path) {}

    std::string next_token(std::string_view what) {
        skip_separators();
        std::string token;
        int c;
        while ((c = in_.peek()) != EOF && !is_space(c) && c != '#') {
            token.push_back(static_cast<char>(in_.get()));
        }
        if (token.empty()) {
            throw ParseError(path_.string() + ": missing " + std::string(what) +
                             " in header");
        }
        return token;
    }

    /// Consumes the single whitespace byte that terminates the header.
    void finish_header() {
        int c = in_.get();
        if (c == EOF || !is_space(c)) {
            throw ParseError(path_.string() + ": header not terminated by whitespace");
        }
    }

private:
    static bool is_space(int c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    }

    void skip_separators() {
        int c;
        while ((c = in_.peek()) != EOF) {
            if (is_space(c)) {
                in_.get();
            } else if (c == '#') {
                while ((c = in_.get()) != EOF && c != '\n') {
                }
            } else {
                break;
            }
        }
    }

    std::istream& in_;
    const std::filesystem::path& path_;
};

int parse_header_int(const std::string& token, const std::filesystem::path& path,
                     std::string_view what) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ParseError(path.string() + ": invalid " + std::string(what) + " '" +
                         token + "'");
    }
    if (value <= 0 || value > static_cast<std::int64_t>(kMaxDimension)) {
        throw ParseError(path.string() + ": " + std::string(what) + " " + token +
                         " out of range");
    }
    return static_cast<int>(value);
}

}  // namespace

PixelBuffer PixelBuffer::create(int width, int height, int channels, std::uint8_t fill) {
    PixelBuffer buffer;
    buffer.width = width;
    buffer.height = height;
    buffer.channels = channels;
    buffer.samples.assign(
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
            static_cast<std::size_t>(channels),
        fill);
    buffer.validate();
    return buffer;
}

void PixelBuffer::validate() const {
    if (width <= 0 || height <= 0) {
        throw ValidationError("pixel buffer has invalid dimensions " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
        throw ValidationError("pixel buffer has unsupported channel count " +
                              std::to_string(channels));
    }
    std::size_t expected = static_cast<std::size_t>(width) *
                           static_cast<std::size_t>(height) *
                           static_cast<std::size_t>(channels);
    if (samples.size() != expected) {
        throw ValidationError("pixel buffer holds " + std::to_string(samples.size()) +
                              " samples, expected " + std::to_string(expected));
    }
}

std::string to_string(Spectrum spectrum) {
    switch (spectrum) {
        case Spectrum::LWIR: return "LWIR";
        case Spectrum::RGB: return "RGB";
        case Spectrum::FUSED: return "FUSED";
    }
    throw ValidationError("unknown spectrum value");
}

Spectrum spectrum_from_string(const std::string& text) {
    if (text == "LWIR") return Spectrum::LWIR;
    if (text == "RGB") return Spectrum::RGB;
    if (text == "FUSED") return Spectrum::FUSED;
    throw ValidationError("unknown spectrum '" + text + "' (expected LWIR, RGB, or FUSED)");
}

void StreamManifest::validate() const {
    if (source_id.empty()) {
        throw ValidationError("manifest source id is empty");
    }
    const FrameEntry* previous = nullptr;
    for (const FrameEntry& entry : entries) {
        if (entry.relative_path.empty()) {
            throw ValidationError("manifest entry " + std::to_string(entry.index) +
                                  " has an empty path");
        }
        std::filesystem::path p(entry.relative_path);
        if (p.is_absolute()) {
            throw ValidationError("manifest entry " + std::to_string(entry.index) +
                                  " path '" + entry.relative_path +
                                  "' must be relative");
        }
        for (const auto& part : p) {
            if (part == "..") {
                throw ValidationError("manifest entry " + std::to_string(entry.index) +
                                      " path '" + entry.relative_path +
                                      "' must not contain '..'");
            }
        }
        if (previous != nullptr) {
            if (entry.index <= previous->index) {
                throw ValidationError("manifest index " + std::to_string(entry.index) +
                                      " does not increase after " +
                                      std::to_string(previous->index));
            }
            if (entry.timestamp_ns < previous->timestamp_ns) {
                throw ValidationError("manifest timestamp " +
                                      std::to_string(entry.timestamp_ns) +
                                      " decreases after " +
                                      std::to_string(previous->timestamp_ns));
            }
        }
        previous = &entry;
    }
}

PixelBuffer read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    HeaderScanner scanner(in, path);
    std::string magic = scanner.next_token("magic number");
    int channels = 0;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw ParseError(path.string() + ": unsupported magic '" + magic +
                         "' (expected P5 or P6)");
    }
    int width = parse_header_int(scanner.next_token("width"), path, "width");
    int height = parse_header_int(scanner.next_token("height"), path, "height");
    std::string maxval = scanner.next_token("maxval");
    if (maxval != "255") {
        throw ParseError(path.string() + ": unsupported maxval " + maxval +
                         " (expected 255)");
    }
    scanner.finish_header();

    PixelBuffer buffer;
    buffer.width = width;
    buffer.height = height;
    buffer.channels = channels;
    std::size_t payload = static_cast<std::size_t>(width) *
                          static_cast<std::size_t>(height) *
                          static_cast<std::size_t>(channels);
    buffer.samples.resize(payload);
    in.read(reinterpret_cast<char*>(buffer.samples.data()),
            static_cast<std::streamsize>(payload));
    std::size_t got = static_cast<std::size_t>(in.gcount());
    if (got < payload) {
        throw ParseError(path.string() + ": truncated pixel payload at byte " +
                         std::to_string(got + 1) + " (expected " +
                         std::to_string(payload) + " bytes, found " +
                         std::to_string(got) + ")");
    }
    return buffer;
}

void write_image(const std::filesystem::path& path, const PixelBuffer& image) {
    image.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << (image.channels == 1 ? "P5" : "P6") << "\n"
        << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.samples.data()),
              static_cast<std::streamsize>(image.samples.size()));
    out.flush();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

StreamManifest read_manifest(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    if (lines.empty()) {
        throw ParseError(path.string() + ": missing header line");
    }

    StreamManifest manifest;
    {
        auto fields = textio::split_fields(lines.front().text);
        if (fields.size() != 2 || !fields[0].starts_with("spectrum=") ||
            !fields[1].starts_with("source=")) {
            textio::fail_line(path, lines.front().number,
                              "expected header 'spectrum=<LWIR|RGB|FUSED> source=<id>'");
        }
        std::string spectrum_text(fields[0].substr(std::string_view("spectrum=").size()));
        std::string source_text(fields[1].substr(std::string_view("source=").size()));
        try {
            manifest.spectrum = spectrum_from_string(spectrum_text);
        } catch (const ValidationError& e) {
            textio::fail_line(path, lines.front().number, e.what());
        }
        if (source_text.empty()) {
            textio::fail_line(path, lines.front().number, "source id is empty");
        }
        manifest.source_id = source_text;
    }

    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = textio::split_fields(lines[i].text);
        if (fields.size() != 3) {
            textio::fail_line(path, lines[i].number,
                              "expected 'index timestamp_ns path', got " +
                                  std::to_string(fields.size()) + " fields");
        }
        FrameEntry entry;
        entry.index = textio::parse_int(fields[0], path, lines[i].number, "index");
        entry.timestamp_ns =
            textio::parse_int(fields[1], path, lines[i].number, "timestamp");
        entry.relative_path = std::string(fields[2]);
        manifest.entries.push_back(std::move(entry));
    }

    try {
        manifest.validate();
    } catch (const ValidationError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return manifest;
}

void write_manifest(const std::filesystem::path& path, const StreamManifest& manifest) {
    manifest.validate();
    std::ostringstream out;
    out << "spectrum=" << to_string(manifest.spectrum) << " source="
        << manifest.source_id << "\n";
    for (const FrameEntry& entry : manifest.entries) {
        out << entry.index << " " << entry.timestamp_ns << " " << entry.relative_path
            << "\n";
    }
    textio::write_file(path, out.str());
}

PixelBuffer expand_lwir(const PixelBuffer& gray) {
    gray.validate();
    if (gray.channels != 1) {
        throw ValidationError("expand_lwir requires a 1-channel buffer, got " +
                              std::to_string(gray.channels) + " channels");
    }
    PixelBuffer out;
    out.width = gray.width;
    out.height = gray.height;
    out.channels = 3;
    out.samples.resize(gray.samples.size() * 3);
    for (std::size_t i = 0; i < gray.samples.size(); ++i) {
        std::uint8_t v = gray.samples[i];
        out.samples[i * 3 + 0] = v;
        out.samples[i * 3 + 1] = v;
        out.samples[i * 3 + 2] = v;
    }
    return out;
}

ColorLut read_lut(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    if (lines.size() != 256) {
        throw ParseError(path.string() + ": expected 256 palette lines, found " +
                         std::to_string(lines.size()));
    }
    ColorLut lut{};
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto fields = textio::split_fields(lines[i].text);
        if (fields.size() != 3) {
            textio::fail_line(path, lines[i].number,
                              "expected 'r g b', got " + std::to_string(fields.size()) +
                                  " fields");
        }
        for (int c = 0; c < 3; ++c) {
            std::int64_t v =
                textio::parse_int(fields[static_cast<std::size_t>(c)], path,
                                  lines[i].number, "palette value");
            if (v < 0 || v > 255) {
                textio::fail_line(path, lines[i].number,
                                  "palette value " + std::to_string(v) +
                                      " outside [0, 255]");
            }
            lut[i][static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(v);
        }
    }
    return lut;
}

PixelBuffer apply_lut(const PixelBuffer& gray, const ColorLut& lut) {
    gray.validate();
    if (gray.channels != 1) {
        throw ValidationError("apply_lut requires a 1-channel buffer, got " +
                              std::to_string(gray.channels) + " channels");
    }
    PixelBuffer out;
    out.width = gray.width;
    out.height = gray.height;
    out.channels = 3;
    out.samples.resize(gray.samples.size() * 3);
    for (std::size_t i = 0; i < gray.samples.size(); ++i) {
        const auto& rgb = lut[gray.samples[i]];
        out.samples[i * 3 + 0] = rgb[0];
        out.samples[i * 3 + 1] = rgb[1];
        out.samples[i * 3 + 2] = rgb[2];
    }
    return out;
}

}  // namespace spectrafuse

#include "doctest.h"

#include "spectrafuse/error.hpp"
#include "spectrafuse/fusion.hpp"
#include "spectrafuse/sync.hpp"
#include "temp_dir.hpp"

#include <filesystem>
#include <random>
#include <string>

using namespace spectrafuse;

namespace {

PixelBuffer constant(int w, int h, int c, std::uint8_t v) {
    return PixelBuffer::create(w, h, c, v);
}

}  // namespace

TEST_CASE("fusion rounds the midpoint away from zero") {
    auto rgb = constant(2, 2, 3, 127);
    auto lwir = constant(2, 2, 3, 128);
    auto mask = constant(2, 2, 1, 255);
    auto out = fuse_pixels(rgb, lwir, mask);
    for (std::uint8_t v : out.samples) CHECK(v == 128);
}

TEST_CASE("alpha limits reproduce the inputs exactly") {
    std::mt19937 rng(7);
    auto rgb = constant(8, 5, 3, 0);
    auto lwir = constant(8, 5, 3, 0);
    for (auto& v : rgb.samples) v = static_cast<std::uint8_t>(rng() & 255);
    for (auto& v : lwir.samples) v = static_cast<std::uint8_t>(rng() & 255);
    auto mask = constant(8, 5, 1, 255);

    FusionPolicy policy;
    policy.alpha = 0.0;
    CHECK(fuse_pixels(rgb, lwir, mask, policy).samples == rgb.samples);
    policy.alpha = 1.0;
    CHECK(fuse_pixels(rgb, lwir, mask, policy).samples == lwir.samples);
}

TEST_CASE("masked-out pixels pass the rgb value through") {
    auto rgb = constant(2, 1, 3, 10);
    auto lwir = constant(2, 1, 3, 200);
    auto mask = constant(2, 1, 1, 255);
    mask.at(0, 0) = 0;
    auto out = fuse_pixels(rgb, lwir, mask);
    CHECK(out.at(0, 0, 0) == 10);
    CHECK(out.at(1, 0, 0) == 105);
}

TEST_CASE("swapping inputs and mirroring alpha is an exact identity") {
    std::mt19937 rng(11);
    auto a = constant(16, 9, 3, 0);
    auto b = constant(16, 9, 3, 0);
    for (auto& v : a.samples) v = static_cast<std::uint8_t>(rng() & 255);
    for (auto& v : b.samples) v = static_cast<std::uint8_t>(rng() & 255);
    auto mask = constant(16, 9, 1, 255);

    FusionPolicy fwd, rev;
    fwd.alpha = 0.25;
    rev.alpha = 0.75;
    CHECK(fuse_pixels(a, b, mask, fwd).samples ==
          fuse_pixels(b, a, mask, rev).samples);
}

TEST_CASE("fusion rejects inconsistent inputs") {
    auto rgb = constant(4, 4, 3, 100);
    auto lwir = constant(4, 4, 3, 100);
    auto mask = constant(4, 4, 1, 255);

    FusionPolicy policy;
    policy.alpha = 1.5;
    CHECK_THROWS_AS(fuse_pixels(rgb, lwir, mask, policy), ValidationError);
    policy.alpha = -0.1;
    CHECK_THROWS_AS(fuse_pixels(rgb, lwir, mask, policy), ValidationError);

    auto bad_mask = constant(4, 4, 1, 255);
    bad_mask.at(2, 1) = 7;
    auto msg = message_of<ValidationError>(
        [&] { fuse_pixels(rgb, lwir, bad_mask); });
    CHECK(msg.find("neither 0 nor 255") != std::string::npos);

    auto small = constant(3, 4, 3, 100);
    CHECK_THROWS_AS(fuse_pixels(small, lwir, mask), ValidationError);
    auto gray = constant(4, 4, 1, 100);
    CHECK_THROWS_AS(fuse_pixels(gray, lwir, mask), ValidationError);
    auto mask3 = constant(4, 4, 3, 255);
    CHECK_THROWS_AS(fuse_pixels(rgb, lwir, mask3), ValidationError);
}

TEST_CASE("sequence fusion writes frames and a fused manifest") {
    TempDir dir;
    std::filesystem::create_directories(dir / "lwir");
    std::filesystem::create_directories(dir / "rgb");

    StreamManifest lwir_manifest, rgb_manifest;
    lwir_manifest.spectrum = Spectrum::LWIR;
    lwir_manifest.source_id = "camL";
    rgb_manifest.spectrum = Spectrum::RGB;
    rgb_manifest.source_id = "camR";
    for (int i = 0; i < 2; ++i) {
        auto gray = constant(4, 3, 1, static_cast<std::uint8_t>(50 + 100 * i));
        auto color = constant(4, 3, 3, static_cast<std::uint8_t>(20 + 10 * i));
        std::string gname = "g" + std::to_string(i) + ".pgm";
        std::string cname = "c" + std::to_string(i) + ".ppm";
        write_image(dir / "lwir" / gname, gray);
        write_image(dir / "rgb" / cname, color);
        lwir_manifest.entries.push_back({i, i * 33333333LL, gname});
        rgb_manifest.entries.push_back({i, i * 33333333LL, cname});
    }

    auto pairs = pair_streams(lwir_manifest, rgb_manifest);
    REQUIRE(pairs.size() == 2);

    auto fused = fuse_sequence(pairs, Homography{}, lwir_manifest, dir / "lwir",
                               rgb_manifest, dir / "rgb", dir / "out");
    REQUIRE(fused.entries.size() == 2);
    CHECK(fused.spectrum == Spectrum::FUSED);
    CHECK(fused.source_id == "camL+camR");
    CHECK(fused.entries[0].index == 0);
    CHECK(fused.entries[1].timestamp_ns == pairs[1].tick_ns);
    CHECK(fused.entries[0].relative_path == "frame_000000.ppm");

    auto reread = read_manifest(dir / "out" / "fused.manifest");
    CHECK(reread.entries.size() == 2);

    // Identity warp keeps every pixel valid: frame 0 is (0.5*50 + 0.5*20) = 35.
    auto f0 = read_image(dir / "out" / "frame_000000.ppm");
    CHECK(f0.width == 4);
    CHECK(f0.channels == 3);
    CHECK(f0.at(2, 1, 1) == 35);
    auto f1 = read_image(dir / "out" / "frame_000001.ppm");
    CHECK(f1.at(0, 0, 2) == 90);
}

TEST_CASE("sequence fusion reports the offending tick on bad frames") {
    TempDir dir;
    std::filesystem::create_directories(dir / "lwir");
    std::filesystem::create_directories(dir / "rgb");

    StreamManifest lwir_manifest, rgb_manifest;
    lwir_manifest.spectrum = Spectrum::LWIR;
    lwir_manifest.source_id = "l";
    rgb_manifest.spectrum = Spectrum::RGB;
    rgb_manifest.source_id = "r";
    write_image(dir / "lwir" / "a.pgm", constant(4, 3, 1, 10));
    lwir_manifest.entries.push_back({0, 0, "a.pgm"});
    rgb_manifest.entries.push_back({0, 0, "missing.ppm"});

    auto pairs = pair_streams(lwir_manifest, rgb_manifest);
    CHECK_THROWS_AS(fuse_sequence(pairs, Homography{}, lwir_manifest,
                                  dir / "lwir", rgb_manifest, dir / "rgb",
                                  dir / "out"),
                    IoError);

    // A pair referencing an index absent from the manifest is rejected.
    std::vector<FramePair> ghost(1);
    ghost[0].lwir_index = 9;
    CHECK_THROWS_AS(fuse_sequence(ghost, Homography{}, lwir_manifest,
                                  dir / "lwir", rgb_manifest, dir / "rgb",
                                  dir / "out"),
                    ValidationError);
}

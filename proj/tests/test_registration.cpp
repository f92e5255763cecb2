#include "doctest.h"

#include "spectrafuse/error.hpp"
#include "spectrafuse/registration.hpp"
#include "temp_dir.hpp"
#include "textio.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace spectrafuse;

namespace {

Homography random_mild_homography(std::mt19937& rng) {
    std::uniform_real_distribution<double> linear(-0.15, 0.15);
    std::uniform_real_distribution<double> shift(-40.0, 40.0);
    std::uniform_real_distribution<double> perspective(-1e-4, 1e-4);
    Homography h;
    h.m = {{{1.0 + linear(rng), linear(rng), shift(rng)},
            {linear(rng), 1.0 + linear(rng), shift(rng)},
            {perspective(rng), perspective(rng), 1.0}}};
    return h;
}

std::vector<Correspondence> exact_correspondences(const Homography& h,
                                                  const std::vector<Point>& points) {
    std::vector<Correspondence> out;
    for (const auto& p : points) out.push_back({p, h.apply(p)});
    return out;
}

double max_entry_diff(const Homography& a, const Homography& b) {
    double worst = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(a.m[r][c] - b.m[r][c]));
    return worst;
}

const std::vector<Point> kGrid8 = {{60, 40},  {580, 55},  {600, 470}, {45, 500},
                                   {320, 70}, {110, 260}, {500, 250}, {330, 460}};

}  // namespace

TEST_CASE("dlt recovers random mild homographies from exact points") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        Homography truth = random_mild_homography(rng);
        Homography estimate = estimate_homography(exact_correspondences(truth, kGrid8));
        CHECK(max_entry_diff(truth, estimate) < 1e-6);
    }
}

TEST_CASE("dlt handles large coordinate offsets via normalization") {
    std::mt19937 rng(7);
    Homography truth = random_mild_homography(rng);
    std::vector<Point> far_points;
    for (const auto& p : kGrid8) far_points.push_back({p.x + 5000.0, p.y + 8000.0});
    Homography estimate = estimate_homography(exact_correspondences(truth, far_points));
    for (const auto& p : far_points) {
        Point want = truth.apply(p);
        Point got = estimate.apply(p);
        CHECK(std::hypot(want.x - got.x, want.y - got.y) < 1e-6);
    }
}

TEST_CASE("dlt rejects fewer than four correspondences") {
    std::vector<Correspondence> three = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}},
                                         {{0, 1}, {0, 1}}};
    auto msg = message_of<ValidationError>([&] { estimate_homography(three); });
    CHECK(msg.find("need at least 4 correspondences, got 3") != std::string::npos);
}

TEST_CASE("dlt rejects collinear points") {
    std::vector<Correspondence> collinear;
    for (int i = 0; i < 5; ++i) {
        double v = 10.0 * i;
        collinear.push_back({{v, v}, {v + 1.0, v + 2.0}});
    }
    auto msg = message_of<ValidationError>([&] { estimate_homography(collinear); });
    CHECK(msg.find("degenerate configuration") != std::string::npos);
}

TEST_CASE("dlt rejects coincident points") {
    std::vector<Correspondence> same(5, {{3.0, 4.0}, {5.0, 6.0}});
    auto msg = message_of<ValidationError>([&] { estimate_homography(same); });
    CHECK(msg.find("coincident") != std::string::npos);
}

TEST_CASE("identity warp reproduces the image with a full mask") {
    PixelBuffer img = PixelBuffer::create(7, 5, 3);
    for (std::size_t i = 0; i < img.samples.size(); ++i)
        img.samples[i] = static_cast<std::uint8_t>((i * 11) % 256);
    WarpResult r = warp_to_target(Homography::identity(), img, 7, 5);
    CHECK(r.image.samples == img.samples);
    for (auto v : r.mask.samples) CHECK(v == 255);
}

TEST_CASE("integer translation warp shifts columns and masks the gap") {
    PixelBuffer img = PixelBuffer::create(2, 2, 1);
    img.at(0, 0, 0) = 10;
    img.at(0, 1, 0) = 10;
    img.at(1, 0, 0) = 200;
    img.at(1, 1, 0) = 200;
    Homography shift;
    shift.m = {{{1, 0, 1}, {0, 1, 0}, {0, 0, 1}}};
    WarpResult r = warp_to_target(shift, img, 2, 2);
    for (int y = 0; y < 2; ++y) {
        CHECK(r.mask.at(0, y, 0) == 0);
        CHECK(r.image.at(0, y, 0) == 0);
        CHECK(r.mask.at(1, y, 0) == 255);
        CHECK(r.image.at(1, y, 0) == 10);
    }
}

TEST_CASE("fractional warp interpolates and rounds half away from zero") {
    PixelBuffer img = PixelBuffer::create(2, 1, 1);
    img.at(0, 0, 0) = 10;
    img.at(1, 0, 0) = 21;
    Homography shift;
    shift.m = {{{1, 0, 0.5}, {0, 1, 0}, {0, 0, 1}}};
    WarpResult r = warp_to_target(shift, img, 2, 1);
    // target x=1 center 1.5 pulls from source x 1.0: halfway of 10 and 21
    CHECK(r.mask.at(1, 0, 0) == 255);
    CHECK(r.image.at(1, 0, 0) == 16);
}

TEST_CASE("homography file round trip preserves exact values") {
    TempDir dir;
    Homography h;
    h.m = {{{0.98, 0.008, -6.0}, {-0.005, 1.02, -2.0}, {1.2e-5, -8e-6, 1.0}}};
    write_homography(dir / "h.txt", h);
    Homography back = read_homography(dir / "h.txt");
    CHECK(max_entry_diff(h, back) == 0.0);
}

TEST_CASE("homography reader normalizes a scaled matrix") {
    TempDir dir;
    textio::write_file(dir / "h.txt", "2 0 0\n0 2 0\n0 0 2\n");
    Homography h = read_homography(dir / "h.txt");
    CHECK(h.m[0][0] == 1.0);
    CHECK(h.m[2][2] == 1.0);
}

TEST_CASE("homography reader accepts an invertible matrix with zero m22") {
    TempDir dir;
    textio::write_file(dir / "h.txt", "1 0 0\n0 0 1\n0 1 0\n");
    Homography h = read_homography(dir / "h.txt");
    CHECK(h.m[2][2] == 0.0);
    Point p = h.apply({2.0, 3.0});
    CHECK(p.x == doctest::Approx(2.0 / 3.0));
    CHECK(p.y == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("homography reader rejects wrong value counts") {
    TempDir dir;
    textio::write_file(dir / "h.txt", "1 0 0\n0 1 0\n0 0\n");
    auto msg = message_of<ParseError>([&] { read_homography(dir / "h.txt"); });
    CHECK(msg.find("expected 9 values, found 8") != std::string::npos);
}

TEST_CASE("homography reader rejects a singular matrix") {
    TempDir dir;
    textio::write_file(dir / "h.txt", "1 2 3\n2 4 6\n0 0 1\n");
    auto msg = message_of<ParseError>([&] { read_homography(dir / "h.txt"); });
    CHECK(msg.find("singular") != std::string::npos);
}

TEST_CASE("apply reports points that map to infinity") {
    Homography h;
    h.m = {{{1, 0, 0}, {0, 1, 0}, {0, -1, 1}}};
    CHECK_THROWS_AS(h.apply({0.0, 1.0}), ValidationError);
}

TEST_CASE("inverted round trips points") {
    std::mt19937 rng(3);
    Homography h = random_mild_homography(rng);
    Homography inv = h.inverted();
    Point p{123.0, 45.0};
    Point q = inv.apply(h.apply(p));
    CHECK(q.x == doctest::Approx(p.x).epsilon(1e-9));
    CHECK(q.y == doctest::Approx(p.y).epsilon(1e-9));
}

TEST_CASE("correspondence file round trip") {
    TempDir dir;
    std::vector<Correspondence> corr = {{{0.5, 1.5}, {2.25, 3.75}},
                                        {{10, 20}, {30, 40}}};
    write_correspondences(dir / "c.txt", corr);
    auto back = read_correspondences(dir / "c.txt");
    REQUIRE(back.size() == 2);
    CHECK(back[0].src.x == 0.5);
    CHECK(back[0].dst.y == 3.75);
    CHECK(back[1].dst.x == 30.0);
}

TEST_CASE("correspondence reader rejects wrong field counts") {
    TempDir dir;
    textio::write_file(dir / "c.txt", "1 2 3\n");
    CHECK_THROWS_AS(read_correspondences(dir / "c.txt"), ParseError);
}

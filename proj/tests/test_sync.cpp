#include "doctest.h"

#include "spectrafuse/error.hpp"
#include "spectrafuse/sync.hpp"
#include "temp_dir.hpp"
#include "textio.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

using namespace spectrafuse;

namespace {

StreamManifest stream_of(Spectrum spectrum, std::vector<std::int64_t> stamps) {
    StreamManifest m;
    m.spectrum = spectrum;
    m.source_id = spectrum == Spectrum::LWIR ? "l" : "r";
    for (std::size_t i = 0; i < stamps.size(); ++i)
        m.entries.push_back({static_cast<std::int64_t>(i), stamps[i],
                             "f" + std::to_string(i) + ".pgm"});
    return m;
}

std::vector<std::int64_t> grid(double rate_hz, int count) {
    std::vector<std::int64_t> out;
    for (int i = 0; i < count; ++i)
        out.push_back(std::llround(i * 1e9 / rate_hz));
    return out;
}

/// Literal restatement of the pairing definition: walk the tick grid and
/// take the nearest entry of each stream, scanning every entry.
std::vector<FramePair> brute_force_pairs(const StreamManifest& lwir,
                                         const StreamManifest& rgb,
                                         const PairingPolicy& policy) {
    std::int64_t t0 = std::max(lwir.entries.front().timestamp_ns,
                               rgb.entries.front().timestamp_ns);
    std::int64_t t_end = std::min(lwir.entries.back().timestamp_ns,
                                  rgb.entries.back().timestamp_ns);
    std::set<std::size_t> used_lwir, used_rgb;
    auto nearest = [&](const StreamManifest& stream, std::set<std::size_t>& used,
                       bool respect_used, std::int64_t tick) -> int {
        int best = -1;
        std::int64_t best_dist = 0;
        for (std::size_t i = 0; i < stream.entries.size(); ++i) {
            if (respect_used && used.count(i)) continue;
            std::int64_t dist = std::abs(stream.entries[i].timestamp_ns - tick);
            if (best < 0 || dist < best_dist) {
                best = static_cast<int>(i);
                best_dist = dist;
            }
        }
        if (best >= 0 && best_dist > policy.tolerance_ns) best = -1;
        return best;
    };
    std::vector<FramePair> out;
    for (std::int64_t k = 0;; ++k) {
        std::int64_t tick = t0 + std::llround(static_cast<double>(k) * 1e9 /
                                              policy.target_rate_hz);
        if (tick > t_end) break;
        int li = nearest(lwir, used_lwir, !policy.allow_reuse, tick);
        int ri = nearest(rgb, used_rgb, !policy.allow_reuse, tick);
        if (li < 0 || ri < 0) continue;
        const auto& le = lwir.entries[static_cast<std::size_t>(li)];
        const auto& re = rgb.entries[static_cast<std::size_t>(ri)];
        FramePair p;
        p.tick_ns = tick;
        p.lwir_index = le.index;
        p.rgb_index = re.index;
        p.lwir_timestamp_ns = le.timestamp_ns;
        p.rgb_timestamp_ns = re.timestamp_ns;
        p.skew_ns = std::max(std::abs(le.timestamp_ns - tick),
                             std::abs(re.timestamp_ns - tick));
        out.push_back(p);
        if (!policy.allow_reuse) {
            used_lwir.insert(static_cast<std::size_t>(li));
            used_rgb.insert(static_cast<std::size_t>(ri));
        }
    }
    return out;
}

void check_equal(const std::vector<FramePair>& a, const std::vector<FramePair>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].tick_ns == b[i].tick_ns);
        CHECK(a[i].lwir_index == b[i].lwir_index);
        CHECK(a[i].rgb_index == b[i].rgb_index);
        CHECK(a[i].skew_ns == b[i].skew_ns);
    }
}

}  // namespace

TEST_CASE("aligned 30 Hz streams pair with zero skew") {
    auto lwir = stream_of(Spectrum::LWIR, grid(30, 30));
    auto rgb = stream_of(Spectrum::RGB, grid(30, 30));
    auto pairs = pair_streams(lwir, rgb);
    REQUIRE(pairs.size() == 30);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        CHECK(pairs[k].skew_ns == 0);
        CHECK(pairs[k].lwir_index == static_cast<std::int64_t>(k));
        CHECK(pairs[k].rgb_index == static_cast<std::int64_t>(k));
    }
}

TEST_CASE("60 and 35 Hz streams over one second give 30 pairs") {
    auto lwir = stream_of(Spectrum::LWIR, grid(60, 60));
    auto rgb = stream_of(Spectrum::RGB, grid(35, 35));
    auto pairs = pair_streams(lwir, rgb);
    CHECK(pairs.size() == 30);
    std::int64_t max_skew = 0;
    for (const auto& p : pairs) max_skew = std::max(max_skew, p.skew_ns);
    CHECK(max_skew <= 14300000);
    check_equal(pairs, brute_force_pairs(lwir, rgb, PairingPolicy{}));
}

TEST_CASE("equidistant entries resolve to the earlier frame") {
    auto lwir = stream_of(Spectrum::LWIR, {100, 300});
    auto rgb = stream_of(Spectrum::RGB, {200});
    PairingPolicy policy;
    policy.target_rate_hz = 1.0;
    policy.tolerance_ns = 150;
    auto pairs = pair_streams(lwir, rgb, policy);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].tick_ns == 200);
    CHECK(pairs[0].lwir_index == 0);
    CHECK(pairs[0].skew_ns == 100);
}

TEST_CASE("allow_reuse toggles whether a frame can serve two ticks") {
    auto lwir = stream_of(Spectrum::LWIR, {70, 90, 110});
    auto rgb = stream_of(Spectrum::RGB, {70, 95, 128});
    PairingPolicy policy;
    policy.target_rate_hz = 1e9 / 20.0;
    policy.tolerance_ns = 20;

    policy.allow_reuse = true;
    auto reused = pair_streams(lwir, rgb, policy);
    REQUIRE(reused.size() == 3);
    CHECK(reused[1].rgb_index == 1);
    CHECK(reused[2].rgb_index == 1);
    check_equal(reused, brute_force_pairs(lwir, rgb, policy));

    policy.allow_reuse = false;
    auto exclusive = pair_streams(lwir, rgb, policy);
    REQUIRE(exclusive.size() == 3);
    CHECK(exclusive[1].rgb_index == 1);
    CHECK(exclusive[2].rgb_index == 2);
    CHECK(exclusive[2].skew_ns == 18);
    check_equal(exclusive, brute_force_pairs(lwir, rgb, policy));
}

TEST_CASE("pairing matches the brute-force oracle on random jittered streams") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> rate_dist(15.0, 90.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto make_stream = [&](Spectrum s) {
            double rate = rate_dist(rng);
            double period = 1e9 / rate;
            std::vector<std::int64_t> stamps;
            std::int64_t t = std::llround(unit(rng) * 2e7);
            while (t < std::int64_t{500000000}) {
                if (unit(rng) > 0.08) stamps.push_back(t);  // occasional dropped frame
                t += std::llround(period * (0.6 + 0.8 * unit(rng)));
            }
            if (stamps.size() < 2) stamps = {0, 1000000};
            return stream_of(s, stamps);
        };
        auto lwir = make_stream(Spectrum::LWIR);
        auto rgb = make_stream(Spectrum::RGB);
        PairingPolicy policy;
        policy.target_rate_hz = 10.0 + 50.0 * unit(rng);
        double period = 1e9 / policy.target_rate_hz;
        policy.tolerance_ns = 1 + std::llround(unit(rng) * (period - 1.0));
        policy.allow_reuse = trial % 2 == 0;
        check_equal(pair_streams(lwir, rgb, policy),
                    brute_force_pairs(lwir, rgb, policy));
    }
}

TEST_CASE("pairing rejects bad policies and empty streams") {
    auto lwir = stream_of(Spectrum::LWIR, {0, 100});
    auto rgb = stream_of(Spectrum::RGB, {0, 100});
    PairingPolicy policy;

    policy.target_rate_hz = 0.0;
    CHECK_THROWS_AS(pair_streams(lwir, rgb, policy), ValidationError);

    policy = {};
    policy.tolerance_ns = 0;
    CHECK_THROWS_AS(pair_streams(lwir, rgb, policy), ValidationError);

    policy = {};
    policy.target_rate_hz = 30.0;
    policy.tolerance_ns = 33333334;
    auto msg =
        message_of<ValidationError>([&] { pair_streams(lwir, rgb, policy); });
    CHECK(msg.find("exceeds the target period") != std::string::npos);

    StreamManifest empty;
    empty.spectrum = Spectrum::LWIR;
    empty.source_id = "cam-empty";
    auto msg2 = message_of<ValidationError>([&] { pair_streams(empty, rgb); });
    CHECK(msg2.find("has no entries") != std::string::npos);
}

TEST_CASE("disjoint time ranges produce no pairs") {
    auto lwir = stream_of(Spectrum::LWIR, {0, 100, 200});
    auto rgb = stream_of(Spectrum::RGB, {900000000, 900000100});
    CHECK(pair_streams(lwir, rgb).empty());
}

TEST_CASE("pairing file round trip") {
    TempDir dir;
    auto lwir = stream_of(Spectrum::LWIR, grid(60, 60));
    auto rgb = stream_of(Spectrum::RGB, grid(35, 35));
    auto pairs = pair_streams(lwir, rgb);
    write_pairing(dir / "p.txt", pairs);
    auto back = read_pairing(dir / "p.txt");
    REQUIRE(back.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(back[i].tick_ns == pairs[i].tick_ns);
        CHECK(back[i].lwir_index == pairs[i].lwir_index);
        CHECK(back[i].rgb_index == pairs[i].rgb_index);
        CHECK(back[i].skew_ns == pairs[i].skew_ns);
    }
}

TEST_CASE("pairing reader rejects malformed rows") {
    TempDir dir;
    textio::write_file(dir / "neg.txt", "0 0 0 -5\n");
    CHECK_THROWS_AS(read_pairing(dir / "neg.txt"), ParseError);
    textio::write_file(dir / "order.txt", "100 0 0 0\n50 1 1 0\n");
    CHECK_THROWS_AS(read_pairing(dir / "order.txt"), ParseError);
    textio::write_file(dir / "fields.txt", "100 0 0\n");
    CHECK_THROWS_AS(read_pairing(dir / "fields.txt"), ParseError);
}

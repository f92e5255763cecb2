#pragma once

#include "spectrafuse/image.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace spectrafuse {

/// One synchronized frame couple on the target tick grid.
struct FramePair {
    std::int64_t tick_ns = 0;
    std::int64_t lwir_index = 0;
    std::int64_t rgb_index = 0;
    std::int64_t lwir_timestamp_ns = 0;
    std::int64_t rgb_timestamp_ns = 0;
    /// Larger of the two members' absolute offsets from the tick.
    std::int64_t skew_ns = 0;
};

struct PairingPolicy {
    double target_rate_hz = 30.0;
    /// Half the 30 Hz period; must not exceed the target period.
    std::int64_t tolerance_ns = 16666667;
    /// When false, a frame consumed by one tick is unavailable to later ticks.
    bool allow_reuse = true;
};

/// Pairs two timestamped streams onto a tick grid that starts at the later
/// of the two first timestamps and advances at the target rate. For each
/// tick the closest frame of each stream is selected (ties go to the
/// earlier frame); a tick where either side is farther than the tolerance
/// yields no pair. Throws ValidationError for empty manifests or a
/// tolerance exceeding the target period.
std::vector<FramePair> pair_streams(const StreamManifest& lwir,
                                    const StreamManifest& rgb,
                                    const PairingPolicy& policy = {});

/// Reads/writes 'tick_ns lwir_index rgb_index skew_ns' lines. Member
/// timestamps are not stored; loaded pairs carry them as zero.
std::vector<FramePair> read_pairing(const std::filesystem::path& path);
void write_pairing(const std::filesystem::path& path,
                   const std::vector<FramePair>& pairs);

}  // namespace spectrafuse

#include "spectrafuse/sync.hpp"

#include "spectrafuse/error.hpp"
#include "textio.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

namespace spectrafuse {

namespace {

std::int64_t distance(std::int64_t a, std::int64_t b) {
    return a > b ? a - b : b - a;
}

/// Selects the closest frame to `tick`, honoring consumption when reuse is
/// disabled. `cursor` tracks the best candidate across increasing ticks.
class StreamSelector {
public:
    StreamSelector(const std::vector<FrameEntry>& entries, bool allow_reuse)
        : entries_(entries),
          allow_reuse_(allow_reuse),
          consumed_(allow_reuse ? 0 : entries.size(), false) {}

    /// Returns the position of the closest selectable entry within
    /// tolerance, or npos.
    std::size_t select(std::int64_t tick, std::int64_t tolerance) {
        while (cursor_ + 1 < entries_.size() &&
               distance(entries_[cursor_ + 1].timestamp_ns, tick) <
                   distance(entries_[cursor_].timestamp_ns, tick)) {
            ++cursor_;
        }
        if (allow_reuse_) {
            std::size_t best = cursor_;
            if (distance(entries_[best].timestamp_ns, tick) > tolerance) return npos;
            return best;
        }
        // Scan the tolerance window around the cursor for the closest
        // unconsumed entry; ties resolve to the earlier frame.
        std::size_t best = npos;
        std::int64_t best_dist = 0;
        std::size_t lo = cursor_;
        while (lo > 0 && entries_[lo - 1].timestamp_ns >= tick - tolerance) --lo;
        for (std::size_t i = lo; i < entries_.size(); ++i) {
            if (entries_[i].timestamp_ns > tick + tolerance) break;
            if (consumed_[i]) continue;
            std::int64_t d = distance(entries_[i].timestamp_ns, tick);
            if (d > tolerance) continue;
            if (best == npos || d < best_dist) {
                best = i;
                best_dist = d;
            }
        }
        return best;
    }

    void consume(std::size_t position) {
        if (!allow_reuse_) consumed_[position] = true;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    const std::vector<FrameEntry>& entries_;
    bool allow_reuse_;
    std::vector<bool> consumed_;
    std::size_t cursor_ = 0;
};

}  // namespace

std::vector<FramePair> pair_streams(const StreamManifest& lwir,
                                    const StreamManifest& rgb,
                                    const PairingPolicy& policy) {
    lwir.validate();
    rgb.validate();
    if (lwir.entries.empty()) {
        throw ValidationError("cannot pair: LWIR manifest has no entries");
    }
    if (rgb.entries.empty()) {
        throw ValidationError("cannot pair: RGB manifest has no entries");
    }
    if (!(policy.target_rate_hz > 0.0)) {
        throw ValidationError("target rate must be positive");
    }
    if (policy.tolerance_ns <= 0) {
        throw ValidationError("tolerance must be positive");
    }
    std::int64_t period_ns = std::llround(1e9 / policy.target_rate_hz);
    if (policy.tolerance_ns > period_ns) {
        throw ValidationError("tolerance " + std::to_string(policy.tolerance_ns) +
                              " ns exceeds the target period " +
                              std::to_string(period_ns) + " ns");
    }

    std::int64_t t0 = std::max(lwir.entries.front().timestamp_ns,
                               rgb.entries.front().timestamp_ns);
    std::int64_t t_end = std::min(lwir.entries.back().timestamp_ns,
                                  rgb.entries.back().timestamp_ns);

    StreamSelector lwir_sel(lwir.entries, policy.allow_reuse);
    StreamSelector rgb_sel(rgb.entries, policy.allow_reuse);

    std::vector<FramePair> pairs;
    for (std::int64_t k = 0;; ++k) {
        std::int64_t tick =
            t0 + std::llround(static_cast<double>(k) * 1e9 / policy.target_rate_hz);
        if (tick > t_end) break;
        std::size_t li = lwir_sel.select(tick, policy.tolerance_ns);
        std::size_t ri = rgb_sel.select(tick, policy.tolerance_ns);
        if (li == StreamSelector::npos || ri == StreamSelector::npos) continue;
        lwir_sel.consume(li);
        rgb_sel.consume(ri);
        const FrameEntry& le = lwir.entries[li];
        const FrameEntry& re = rgb.entries[ri];
        FramePair pair;
        pair.tick_ns = tick;
        pair.lwir_index = le.index;
        pair.rgb_index = re.index;
        pair.lwir_timestamp_ns = le.timestamp_ns;
        pair.rgb_timestamp_ns = re.timestamp_ns;
        pair.skew_ns = std::max(distance(le.timestamp_ns, tick),
                                distance(re.timestamp_ns, tick));
        pairs.push_back(pair);
    }
    return pairs;
}

std::vector<FramePair> read_pairing(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    std::vector<FramePair> pairs;
    pairs.reserve(lines.size());
    for (const auto& line : lines) {
        auto fields = textio::split_fields(line.text);
        if (fields.size() != 4) {
            textio::fail_line(path, line.number,
                              "expected 'tick_ns lwir_index rgb_index skew_ns', got " +
                                  std::to_string(fields.size()) + " fields");
        }
        FramePair pair;
        pair.tick_ns = textio::parse_int(fields[0], path, line.number, "tick");
        pair.lwir_index = textio::parse_int(fields[1], path, line.number, "LWIR index");
        pair.rgb_index = textio::parse_int(fields[2], path, line.number, "RGB index");
        pair.skew_ns = textio::parse_int(fields[3], path, line.number, "skew");
        if (pair.skew_ns < 0) {
            textio::fail_line(path, line.number, "skew must be non-negative");
        }
        if (!pairs.empty() && pair.tick_ns <= pairs.back().tick_ns) {
            textio::fail_line(path, line.number,
                              "tick " + std::to_string(pair.tick_ns) +
                                  " does not increase after " +
                                  std::to_string(pairs.back().tick_ns));
        }
        pairs.push_back(pair);
    }
    return pairs;
}

void write_pairing(const std::filesystem::path& path,
                   const std::vector<FramePair>& pairs) {
    std::ostringstream out;
    out << "# tick_ns lwir_index rgb_index skew_ns\n";
    for (const FramePair& pair : pairs) {
        out << pair.tick_ns << " " << pair.lwir_index << " " << pair.rgb_index << " "
            << pair.skew_ns << "\n";
    }
    textio::write_file(path, out.str());
}

}  // namespace spectrafuse

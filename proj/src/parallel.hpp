#pragma once

// Internal helper for data-parallel loops over image rows. The worker
// count comes from SPECTRAFUSE_THREADS (unset or 0 means one thread per
// hardware core); results never depend on how the range is partitioned.

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace spectrafuse::detail {

inline int thread_count() {
    if (const char* env = std::getenv("SPECTRAFUSE_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) {
            return static_cast<int>(n);
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for every i in [begin, end), split into contiguous chunks.
inline void parallel_for(int begin, int end, const std::function<void(int)>& fn) {
    int total = end - begin;
    if (total <= 0) return;
    int workers = thread_count();
    if (workers > total) workers = total;
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    int chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int lo = begin + w * chunk;
        int hi = lo + chunk < end ? lo + chunk : end;
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

}  // namespace spectrafuse::detail

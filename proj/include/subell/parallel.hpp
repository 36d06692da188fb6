#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace subell {

// Deterministic work distribution: fn(i) must write only to slot i of some
// preallocated output, so the result is independent of the thread count.
template <class Fn>
void parallel_for_index(std::int64_t count, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const int nthreads = static_cast<int>(std::min<std::uint64_t>(hw ? hw : 1, 8));
    if (count < 32768 || nthreads <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (count + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
        const std::int64_t lo = t * chunk, hi = std::min<std::int64_t>(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace subell

// Minimal data-parallel loop helper. Results must be written to preallocated
// slots indexed by the loop variable so that reductions can run in a fixed
// order afterwards; this keeps floating-point output identical for any worker
// count. FLPSR_THREADS caps the number of workers (default: all cores).
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace flpsr {

inline int max_threads() {
    static const int cached = [] {
        if (const char* env = std::getenv("FLPSR_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<int>(std::min<long>(v, 256));
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 2 : static_cast<int>(hw);
    }();
    return cached;
}

template <typename Fn>
void parallel_for(std::int64_t count, Fn&& fn, std::int64_t min_per_thread = 64) {
    if (count <= 0) return;
    const int workers = static_cast<int>(
        std::min<std::int64_t>(max_threads(), std::max<std::int64_t>(1, count / min_per_thread)));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    const std::int64_t chunk = (count + workers - 1) / workers;
    for (int w = 1; w < workers; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    const std::int64_t hi0 = std::min<std::int64_t>(count, chunk);
    for (std::int64_t i = 0; i < hi0; ++i) fn(i);
    for (auto& t : pool) t.join();
}

// Pairwise summation in a fixed order; independent of how slots were filled.
inline double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

}  // namespace flpsr

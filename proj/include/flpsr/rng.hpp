// Counter-based deterministic RNG. Every draw is a pure function of
// (key, counter), so streams can be evaluated in any order on any thread and
// still reproduce bit-identical results across platforms.
#pragma once

#include <cstdint>

namespace flpsr {

// splitmix64 finalizer (Vigna 2015); good avalanche, passes standard batteries
// when driven by a counter.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Stable stream key for replication r of an experiment at agent count n.
inline std::uint64_t replication_seed(std::uint64_t master, std::uint64_t n, std::uint64_t rep) {
    return hash_combine(hash_combine(master, n), rep);
}

struct CounterRng {
    std::uint64_t key = 0;

    // uniform draw in [0, 1)
    double uniform(std::uint64_t counter) const {
        const std::uint64_t z = mix64(key + counter * 0x9e3779b97f4a7c15ULL);
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }
};

}  // namespace flpsr

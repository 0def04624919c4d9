#pragma once

#include <cstdint>
#include <random>

namespace adm {

// splitmix64 finalizer; used to derive independent sub-seeds from one base
// seed so that e.g. each epoch shuffle and each sweep point gets its own
// stream without the streams overlapping.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag = 0) {
    return std::mt19937_64(mix_seed(seed, tag));
}

}  // namespace adm

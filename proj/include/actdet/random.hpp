#pragma once

#include <cstdint>
#include <random>

namespace actdet {

// splitmix64 mix; used to derive independent per-class / per-tree / per-video
// seeds from one master seed so serial and parallel execution agree.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(mix_seed(seed, stream));
}

// Standard normal draw; sigma scaling is done by callers so sigma == 0 yields
// the mean exactly while consuming the same number of engine states.
inline double standard_normal(std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

}  // namespace actdet

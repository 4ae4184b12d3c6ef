#pragma once

#include <cstdint>
#include <random>

namespace dlsmc {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Independent stream seed for (master, tag); used so that every stage,
// time step and trajectory owns its own deterministic substream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s ^= (tag + 0x632be59bd9b4e019ull) * 0x9e3779b97f4a7c15ull;
    z ^= splitmix64(s);
    return z;
}

// Uniform draw strictly inside (0,1); safe as input to inverse CDFs.
inline double uniform01(Rng& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace dlsmc

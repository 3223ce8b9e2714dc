#pragma once

#include <cstdint>
#include <random>

namespace kmx {

using Rng = std::mt19937_64;

// splitmix64 mixing step (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based seed derivation: the stream seed for (base, index) does not
// depend on any other index, so restarts can run in any order or in parallel
// and still reproduce the sequential results.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ splitmix64(index * 0xD1B54A32D192ED03ULL + 1));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

}  // namespace kmx

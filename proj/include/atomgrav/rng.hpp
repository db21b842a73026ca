#pragma once
#include <cstdint>
#include <random>

namespace atomgrav {

// splitmix64 mixing: derives independent substream seeds from (seed, index) so
// scan points / atom batches can be evaluated in any order (or in parallel)
// with byte-identical results.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(mix_seed(seed, index));
}

}  // namespace atomgrav

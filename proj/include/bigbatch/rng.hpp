#pragma once

#include <cstdint>
#include <random>

namespace bigbatch {

// Single deterministic stream per run; every stochastic choice draws from it.
using Rng = std::mt19937_64;

// Unbiased uniform draw from {0, ..., bound-1} via rejection sampling.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    std::uint64_t v = rng();
    while (v < threshold) v = rng();
    return v % bound;
}

}  // namespace bigbatch

#pragma once

#include <cstdint>
#include <random>

namespace tc {

using Rng = std::mt19937_64;

// SplitMix64 mixing step.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from a master seed. Used so that
// per-stock workers are reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 1));
}

}  // namespace tc

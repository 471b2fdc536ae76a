#pragma once

#include <cmath>
#include <cstdint>

namespace speq {

// Counter-based generator: a 10-round Philox-style 4x32 block keyed by the
// run seed, with the counter laid out as (path, step, slot). Every draw is a
// pure function of (seed, path, step, slot), so path substreams are
// independent of scheduling and thread count.
namespace rng {

struct Block {
    std::uint32_t v[4];
};

inline Block philox(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                    std::uint32_t slot) {
    std::uint32_t c0 = static_cast<std::uint32_t>(path);
    std::uint32_t c1 = static_cast<std::uint32_t>(path >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(step);
    std::uint32_t c3 = static_cast<std::uint32_t>(step >> 32) ^ slot;
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = 0xD2511F53ULL * c0;
        std::uint64_t p1 = 0xCD9E8D57ULL * c2;
        std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        c0 = hi1 ^ c1 ^ k0;
        c1 = lo1;
        c2 = hi0 ^ c3 ^ k1;
        c3 = lo0;
        k0 += 0x9E3779B9U;
        k1 += 0xBB67AE85U;
    }
    return Block{{c0, c1, c2, c3}};
}

/// Uniform draw in the open interval (0,1); 53 significant bits.
inline double uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                      std::uint32_t slot) {
    Block b = philox(seed, path, step, slot);
    std::uint64_t bits =
        (static_cast<std::uint64_t>(b.v[0]) << 32) | b.v[1];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two substream slots.
inline double normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    double u1 = uniform(seed, path, step, 0);
    double u2 = uniform(seed, path, step, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

}  // namespace rng
}  // namespace speq

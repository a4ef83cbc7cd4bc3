#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace episarsa {

/// splitmix64 step; used only to spread seed material, never as the main engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent stream for (master_seed, stream_index).
///
/// std::mt19937_64 output is pinned by the standard, so a stream is
/// bit-identical on every platform. One stream per episode makes runs
/// reproducible under any execution order and makes checkpoint/restore
/// trivial: the "rng state" is just (master_seed, episode_index).
inline std::mt19937_64 stream_rng(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t s = master_seed;
    splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (stream_index + 1);
    return std::mt19937_64(splitmix64(s));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (avoids the implementation-defined
/// std::normal_distribution, keeping draws pinned to the engine output).
inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    // 1-u1 keeps the log argument in (0,1]
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Inverse-CDF draw from a probability row (entries >= 0, sum <= 1 + dust).
/// Residual float dust at the top of the CDF falls to the last positive entry.
inline int sample_categorical(std::span<const double> probs, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double cum = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = static_cast<int>(i);
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return last_positive;
}

} // namespace episarsa

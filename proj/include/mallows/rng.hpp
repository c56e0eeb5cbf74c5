#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

#include "mallows/gaussian.hpp"

// Deterministic random streams. The engine is xoshiro256++ seeded through a
// splitmix64 expansion, so draws are reproducible bit for bit across
// platforms and compilers (std::mt19937 would be, but the std distributions
// on top of it are not). Normal variates use the inverse cdf for the same
// reason.

namespace mallows {

// splitmix64 output function; doubles as a 64-bit mixer for stream derivation.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed = 0) noexcept {
        std::uint64_t x = seed;
        for (auto& s : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1): (k + 1/2) / 2^53 for k in [0, 2^53).
    double uniform01() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal by inverse transform.
    double normal() { return gaussian::quantile(uniform01()); }

    // Unbiased integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        for (;;) {
            const std::uint64_t r = (*this)();
            if (r < limit) return r % bound;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// Derives an independent child stream from a master seed and a path of
// indices (study stage, grid position, replication, ...). Pure function of
// its arguments: the same path always yields the same stream, no matter how
// work is split across threads.
inline RandomStream derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master ^ 0x6d616c6c6f777331ULL);
    for (std::uint64_t idx : path) h = mix64(h ^ mix64(idx));
    return RandomStream(h);
}

}  // namespace mallows

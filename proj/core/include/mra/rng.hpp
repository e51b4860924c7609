#pragma once

#include <array>
#include <cstdint>

namespace mra {

// splitmix64; used only to expand seeds.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

// xoshiro256**. All randomness in the project flows from a 64-bit seed
// through this generator; no ambient entropy anywhere.
//
// Stream derivation for parallel use: stream k is seeded from
// splitmix64(seed + k * 0x9e3779b97f4a7c15), so independently indexed
// streams never share state and results are reproducible from
// (seed, stream) alone.
class Xoshiro256StarStar {
public:
    explicit Xoshiro256StarStar(std::uint64_t seed, std::uint64_t stream = 0) {
        SplitMix64 sm(seed + stream * 0x9e3779b97f4a7c15ull);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, bound), bound > 0, unbiased by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % bound;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_;
};

}  // namespace mra

#pragma once

#include <cstdint>
#include <string_view>

namespace tde {

// SplitMix64. All randomness in the library flows from one master seed through
// named forks, so every run is reproducible from the seed recorded in the
// report header, independent of libc distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Modulo bias is irrelevant at our sample sizes
    // and keeps the stream arithmetic trivially portable.
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    unsigned __int128 next_u128() {
        unsigned __int128 hi = next_u64();
        return (hi << 64) | next_u64();
    }

    // Deterministic named substream: forks with distinct tags are independent
    // for practical purposes and insensitive to call order elsewhere.
    Rng fork(std::string_view tag) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return Rng(state_ ^ (h | 1));
    }

private:
    std::uint64_t state_;
};

}  // namespace tde

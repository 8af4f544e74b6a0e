#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "tde/errors.hpp"

namespace tde {

using u128 = unsigned __int128;

// A point of the circle R/Z in 128-bit fixed point: value = frac / 2^128.
// Addition mod 1 is plain wraparound addition, so every rotation step is
// exact. An odd increment has additive order 2^128 in Z/2^128, which is the
// machine-checkable surrogate for irrationality used by the rotation systems:
// no orbit period is shorter than 2^128 at working precision.
struct Angle {
    u128 frac = 0;

    friend Angle operator+(Angle a, Angle b) { return Angle{a.frac + b.frac}; }
    friend Angle operator-(Angle a, Angle b) { return Angle{a.frac - b.frac}; }
    friend bool operator==(Angle a, Angle b) { return a.frac == b.frac; }

    Angle scaled(long long k) const {
        // k * frac mod 2^128; two's complement handles negative k.
        return Angle{static_cast<u128>(k) * frac};
    }

    double to_double() const {
        return (static_cast<double>(static_cast<std::uint64_t>(frac >> 64)) * 0x1.0p-64) +
               (static_cast<double>(static_cast<std::uint64_t>(frac)) * 0x1.0p-128);
    }
};

inline Angle make_angle(std::uint64_t hi, std::uint64_t lo) {
    return Angle{(static_cast<u128>(hi) << 64) | lo};
}

// floor((sqrt(2)-1) * 2^128) with the low bit forced to 1 (off by at most
// 2^-128 from the real number). Verified against exact integer square roots
// in the test suite.
inline Angle sqrt2_minus_1() { return make_angle(0x6a09e667f3bcc908ULL, 0xb2fb1366ea957d3fULL); }

// (sqrt(5)-1)/2 * 2^128, same convention. Already odd.
inline Angle golden_conjugate() { return make_angle(0x9e3779b97f4a7c15ULL, 0xf39cc0605cedc835ULL); }

inline Angle angle_from_hex(std::string_view hex) {
    require(!hex.empty() && hex.size() <= 32, errc::config_error,
            "angle hex literal must have 1..32 hex digits, got '" + std::string(hex) + "'");
    u128 v = 0;
    for (char c : hex) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = 10 + (c - 'a');
        else if (c >= 'A' && c <= 'F') d = 10 + (c - 'A');
        else fail(errc::config_error, "bad hex digit in angle literal");
        v = (v << 4) | static_cast<unsigned>(d);
    }
    // Short literals are high-order aligned so "8" means 1/2.
    v <<= 4 * (32 - hex.size());
    return Angle{v};
}

inline std::string angle_to_hex(Angle a) {
    static const char* digits = "0123456789abcdef";
    std::string s(32, '0');
    u128 v = a.frac;
    for (int i = 31; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[static_cast<unsigned>(v & 0xf)];
        v >>= 4;
    }
    return s;
}

// d(x, y) = min(|x-y|, 1-|x-y|): arc-length metric, diameter 1/2.
inline double circle_distance(Angle a, Angle b) {
    u128 d = a.frac - b.frac;  // (a - b) mod 1
    u128 e = static_cast<u128>(0) - d;
    u128 m = d < e ? d : e;
    return Angle{m}.to_double();
}

}  // namespace tde

#include "oscmon/noise.hpp"

#include <cmath>
#include <numbers>

namespace oscmon {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t NoiseStream::splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

NoiseStream::NoiseStream(std::uint64_t seed) : seed_(seed) {
    // splitmix64 expansion of the seed into the xoshiro256++ state
    std::uint64_t x = seed;
    for (auto& w : s_) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        w = z ^ (z >> 31);
    }
}

std::uint64_t NoiseStream::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double NoiseStream::uniform() {
    // 53-bit mantissa, shifted into (0,1) so log() below never sees zero
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double NoiseStream::gauss() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

NoiseStream NoiseStream::child(std::uint64_t index) const {
    // child i gets seed splitmix64(master + (i+1) * golden ratio increment)
    return NoiseStream(splitmix64(seed_ + (index + 1) * 0x9E3779B97F4A7C15ULL));
}

}  // namespace oscmon

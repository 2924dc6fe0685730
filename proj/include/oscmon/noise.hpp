#pragma once

#include <array>
#include <cstdint>

namespace oscmon {

/// Seeded Gaussian increment stream.
///
/// The generator is pinned so that independent implementations can reproduce
/// the exact sequence: xoshiro256++ seeded through splitmix64, Box-Muller on
/// 53-bit uniforms in (0,1).  Substreams for ensemble members are derived by
/// child(), also via splitmix64; see README for the exact rule.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed);

    /// One standard normal deviate N(0,1).
    double gauss();

    /// Uniform in (0,1); consumed by gauss() internally, exposed for fuzzing.
    double uniform();

    /// Independent substream for ensemble member `index`.
    NoiseStream child(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

    static std::uint64_t splitmix64(std::uint64_t x);

private:
    std::uint64_t next_u64();

    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> s_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace oscmon

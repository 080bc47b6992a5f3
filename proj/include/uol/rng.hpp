#pragma once
// Seeded randomness. The generator is std::mt19937_64 (64-bit Mersenne
// Twister, whose output sequence is fixed by the C++ standard); uniforms are
// built from the top 53 bits by hand because the standard distributions are
// not reproducible across library implementations.

#include <cstdint>
#include <random>

namespace uol {

inline constexpr const char* kRngAlgorithm = "mt19937_64";

/// SplitMix64 finalizer; maps (seed, stream) to decorrelated generator seeds.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent substreams of one experiment seed.
enum class Stream : std::uint64_t { process = 1, learner = 2, mixture = 3, bench = 4, noise = 5 };

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, Stream stream)
        : engine_(derive_seed(seed, static_cast<std::uint64_t>(stream))) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform on {0, ..., n-1}; n > 0.
    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

private:
    std::mt19937_64 engine_;
};

}  // namespace uol
